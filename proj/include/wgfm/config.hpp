#pragma once

// Config-driven run description.  One JSON file with a versioned schema;
// unknown keys are errors so configs cannot silently drift.

#include <filesystem>
#include <set>

#include <json.hpp>

#include "wgfm/imaging.hpp"

namespace wgfm {

using json = nlohmann::json;

struct BlockSpec {
  double x1;
  double source_xperp;
};

struct ImagingConfig {
  double epsilon = 0.01;
  double rho = 0.01;
  double z1_min = -2.0;
  double z1_max = 2.0;
  int nx = 201;
  int nperp = 17;
  bool fm = true;
  bool fbsm = true;
  std::optional<bool> doubled;  // defaults to the dataset flag
};

struct OutputConfig {
  std::string directory = "out";
  bool csv = true;
  bool pgm = true;
};

struct RunConfig {
  Waveguide waveguide;
  std::optional<SourceSpec> source;  // exactly one of source / block
  std::optional<BlockSpec> block;
  double measurement_a;
  double measurement_xperp;
  bool side_left = true;
  bool side_right = false;
  FrequencyGrid grid;
  std::optional<double> alpha;
  double tau = 0.0;
  QuadratureRule quadrature;
  double noise_delta = 0.05;
  std::uint64_t noise_seed = 1;
  ImagingConfig imaging;
  OutputConfig outputs;
  std::string canonical;  // canonical JSON dump, hashed into the manifest

  MeasurementConfig measurement(MeasurementSide side) const {
    return MeasurementConfig(measurement_a, measurement_xperp, side);
  }

  /// True range support [lo, hi] of the configured source or block.
  std::pair<double, double> true_range_support() const {
    if (block) return {block->x1, block->x1};
    if (!source) throw std::logic_error("config has neither source nor block");
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& r : source->regions) {
      const BoundingBox b = r.shape.bbox();
      lo = std::min(lo, b.x1_min);
      hi = std::max(hi, b.x1_max);
    }
    return {lo, hi};
  }
};

namespace detail {

inline void check_keys(const json& j, const std::set<std::string>& allowed,
                       const std::string& where) {
  for (const auto& [key, _] : j.items())
    if (!allowed.count(key))
      throw std::invalid_argument("unknown config key '" + key + "' in " + where);
}

inline cplx parse_amplitude(const json& j) {
  if (j.is_number()) return cplx(j.get<double>(), 0.0);
  if (j.is_array() && j.size() == 2)
    return cplx(j[0].get<double>(), j[1].get<double>());
  throw std::invalid_argument("amplitude must be a number or [re, im]");
}

inline Region parse_shape(const json& j) {
  check_keys(j, {"type", "x1", "xperp", "vertices", "center", "radius", "amplitude"},
             "source shape");
  const std::string type = j.at("type").get<std::string>();
  if (type == "rectangle") {
    const auto x1 = j.at("x1"), xp = j.at("xperp");
    return Region::rectangle(x1.at(0).get<double>(), x1.at(1).get<double>(),
                             xp.at(0).get<double>(), xp.at(1).get<double>());
  }
  if (type == "polygon") {
    std::vector<Point> verts;
    for (const auto& v : j.at("vertices"))
      verts.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
    return Region::polygon(std::move(verts));
  }
  if (type == "disc") {
    const auto c = j.at("center");
    return Region::disc({c.at(0).get<double>(), c.at(1).get<double>()},
                        j.at("radius").get<double>());
  }
  throw std::invalid_argument("unknown shape type '" + type + "'");
}

}  // namespace detail

inline RunConfig parse_config(const json& j) {
  using detail::check_keys;
  check_keys(j, {"schema", "waveguide", "source", "block", "measurement", "grid",
                 "quadrature", "noise", "imaging", "outputs"},
             "config root");
  if (j.at("schema").get<std::string>() != "wgfm-run/1")
    throw std::invalid_argument("unsupported config schema (want wgfm-run/1)");

  const auto& jw = j.at("waveguide");
  check_keys(jw, {"height", "boundary"}, "waveguide");
  Waveguide wg(jw.at("height").get<double>(),
               boundary_from_string(jw.at("boundary").get<std::string>()));
  const auto [l1, l2] = passband(wg);

  std::optional<SourceSpec> source;
  std::optional<BlockSpec> block;
  if (j.contains("source") && j.contains("block"))
    throw std::invalid_argument("config takes 'source' or 'block', not both");
  if (j.contains("source")) {
    const auto& js = j.at("source");
    check_keys(js, {"shapes", "theta"}, "source");
    const double theta = js.value("theta", 0.0);
    std::vector<SourceRegion> regions;
    for (const auto& sh : js.at("shapes")) {
      cplx amp = sh.contains("amplitude") ? detail::parse_amplitude(sh.at("amplitude"))
                                          : cplx(1.0, 0.0);
      regions.push_back({detail::parse_shape(sh), amp});
    }
    source.emplace(std::move(regions), theta);
  } else if (j.contains("block")) {
    const auto& jb = j.at("block");
    check_keys(jb, {"x1", "source_xperp"}, "block");
    block = BlockSpec{jb.at("x1").get<double>(),
                      jb.value("source_xperp",
                               j.at("measurement").at("xperp_star").get<double>())};
  }

  const auto& jm = j.at("measurement");
  check_keys(jm, {"a", "xperp_star", "sides"}, "measurement");
  const double a = jm.at("a").get<double>();
  const double xps = jm.at("xperp_star").get<double>();
  if (!(xps > 0.0 && xps < wg.height))
    throw std::invalid_argument("xperp_star must lie in (0, height)");
  bool side_left = true, side_right = false;
  if (jm.contains("sides")) {
    side_left = side_right = false;
    for (const auto& s : jm.at("sides")) {
      if (s.get<std::string>() == "left") side_left = true;
      else if (s.get<std::string>() == "right") side_right = true;
      else throw std::invalid_argument("measurement side must be left or right");
    }
    if (!side_left && !side_right)
      throw std::invalid_argument("measurement needs at least one side");
  }

  const auto& jg = j.at("grid");
  check_keys(jg, {"k_minus", "k_plus", "n", "mode", "alpha", "tau"}, "grid");
  std::optional<double> alpha;
  if (jg.contains("alpha") && !jg.at("alpha").is_null())
    alpha = jg.at("alpha").get<double>();
  const double km = jg.value("k_minus", 0.0);
  double kp;
  if (jg.contains("k_plus")) kp = jg.at("k_plus").get<double>();
  else if (alpha) kp = std::sqrt(l2 * l2 - l1 * l1) / *alpha;
  else kp = std::sqrt(l2 * l2 - l1 * l1);
  GridMode mode = GridMode::Vertex;
  if (jg.contains("mode")) {
    const std::string m = jg.at("mode").get<std::string>();
    if (m == "vertex") mode = GridMode::Vertex;
    else if (m == "midpoint") mode = GridMode::Midpoint;
    else throw std::invalid_argument("grid mode must be vertex or midpoint");
  }
  FrequencyGrid grid(km, kp, jg.at("n").get<int>(), mode);

  double cell = wg.height / 40.0;
  if (j.contains("quadrature")) {
    check_keys(j.at("quadrature"), {"cell"}, "quadrature");
    cell = j.at("quadrature").at("cell").get<double>();
  }

  double delta = 0.05;
  std::uint64_t seed = 1;
  if (j.contains("noise")) {
    const auto& jn = j.at("noise");
    check_keys(jn, {"delta", "seed"}, "noise");
    delta = jn.value("delta", 0.05);
    if (jn.contains("seed")) seed = jn.at("seed").get<std::uint64_t>();
  }

  ImagingConfig img;
  if (j.contains("imaging")) {
    const auto& ji = j.at("imaging");
    check_keys(ji, {"epsilon", "rho", "z1", "resolution", "methods", "doubled"},
               "imaging");
    img.epsilon = ji.value("epsilon", 0.01);
    img.rho = ji.value("rho", 0.01);
    if (ji.contains("z1")) {
      img.z1_min = ji.at("z1").at(0).get<double>();
      img.z1_max = ji.at("z1").at(1).get<double>();
    }
    if (ji.contains("resolution")) {
      img.nx = ji.at("resolution").at(0).get<int>();
      img.nperp = ji.at("resolution").at(1).get<int>();
    }
    if (ji.contains("methods")) {
      img.fm = img.fbsm = false;
      for (const auto& m : ji.at("methods")) {
        if (m.get<std::string>() == "fm") img.fm = true;
        else if (m.get<std::string>() == "fbsm") img.fbsm = true;
        else throw std::invalid_argument("imaging method must be fm or fbsm");
      }
    }
    if (ji.contains("doubled")) img.doubled = ji.at("doubled").get<bool>();
  }

  OutputConfig out;
  if (j.contains("outputs")) {
    const auto& jo = j.at("outputs");
    check_keys(jo, {"directory", "formats"}, "outputs");
    out.directory = jo.value("directory", "out");
    if (jo.contains("formats")) {
      out.csv = out.pgm = false;
      for (const auto& f : jo.at("formats")) {
        if (f.get<std::string>() == "csv") out.csv = true;
        else if (f.get<std::string>() == "pgm") out.pgm = true;
        else throw std::invalid_argument("output format must be csv or pgm");
      }
    }
  }

  RunConfig cfg{wg,   std::move(source), block, a,     xps,  side_left,
                side_right, grid,        alpha, jg.value("tau", 0.0),
                QuadratureRule(cell),    delta, seed,  img,  out,
                j.dump()};
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config " + path);
  json j;
  try {
    j = json::parse(is);
  } catch (const json::parse_error& e) {
    throw std::runtime_error("config " + path + ": " + e.what());
  }
  return parse_config(j);
}

// ---------------------------------------------------------------------------
// Run manifest

inline std::uint64_t fnv1a_hash(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline constexpr const char* kVersion = "wgfm 1.0.0";

struct RunManifest {
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  std::string version = kVersion;
  std::vector<std::string> files;
  std::vector<std::pair<std::string, double>> metrics;

  /// Written atomically: temp file in the target directory, then rename.
  void write(const std::filesystem::path& dir) const {
    json j;
    j["schema"] = "wgfm-manifest/1";
    j["config_hash"] = config_hash;
    j["seed"] = seed;
    j["version"] = version;
    j["files"] = files;
    json jm = json::object();
    for (const auto& [k, v] : metrics) jm[k] = v;
    j["metrics"] = jm;
    const auto tmp = dir / "manifest.json.tmp";
    {
      std::ofstream os(tmp);
      if (!os) throw std::runtime_error("cannot write manifest in " + dir.string());
      os << j.dump(2) << "\n";
    }
    std::filesystem::rename(tmp, dir / "manifest.json");
  }
};

}  // namespace wgfm
