#include "mcst/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "mcst/errors.hpp"

namespace mcst {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Shortest round-tripping decimal representation.
std::string fmt(double v) {
  char buf[64];
  for (int prec = 6; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::stod(buf) == v) break;
  }
  return buf;
}

template <typename T>
std::string join(const std::vector<T>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    if constexpr (std::is_floating_point_v<T>) {
      out += fmt(values[i]);
    } else {
      out += std::to_string(values[i]);
    }
  }
  return out;
}

std::vector<std::string> split(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

const char* kappa_name(KappaMode m) { return m == KappaMode::kUniform ? "uniform" : "statistical"; }

const std::set<std::string> kScanKeys = {"scan.size",     "scan.pixel_mm",    "scan.views",
                                         "scan.detectors", "scan.detector_mm", "scan.attenuation_scale"};

void apply_scan(const std::map<std::string, std::string>& kv, ct::ScanGeometry& g) {
  for (const auto& [key, value] : kv) {
    if (key == "scan.size") {
      g.height = g.width = static_cast<int>(parse_int(value, key));
    } else if (key == "scan.pixel_mm") {
      g.pixel_mm = parse_double(value, key);
    } else if (key == "scan.views") {
      g.views = static_cast<int>(parse_int(value, key));
    } else if (key == "scan.detectors") {
      g.detectors = static_cast<int>(parse_int(value, key));
    } else if (key == "scan.detector_mm") {
      g.detector_mm = parse_double(value, key);
    } else if (key == "scan.attenuation_scale") {
      g.attenuation_scale = parse_double(value, key);
    }
  }
}

}  // namespace

std::map<std::string, std::string> parse_key_values(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream lines(text);
  std::string line, section;
  int number = 0;
  while (std::getline(lines, line)) {
    ++number;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("config line " + std::to_string(number) + ": bad section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(number) + ": expected key = value");
    const std::string key = (section.empty() ? "" : section + ".") + trim(line.substr(0, eq));
    if (!out.emplace(key, trim(line.substr(eq + 1))).second) {
      throw ConfigError("config line " + std::to_string(number) + ": duplicate key '" + key + "'");
    }
  }
  return out;
}

double parse_double(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError(what + ": not a number: '" + text + "'");
}

long long parse_int(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError(what + ": not an integer: '" + text + "'");
}

bool parse_bool(const std::string& text, const std::string& what) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError(what + ": not a boolean: '" + text + "'");
}

std::vector<double> parse_double_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  for (const auto& item : split(text)) out.push_back(parse_double(item, what));
  return out;
}

std::vector<int> parse_int_list(const std::string& text, const std::string& what) {
  std::vector<int> out;
  for (const auto& item : split(text)) out.push_back(static_cast<int>(parse_int(item, what)));
  return out;
}

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
  ExperimentConfig cfg;
  const auto kv = parse_key_values(text);
  apply_scan(kv, cfg.scan);
  for (const auto& [key, value] : kv) {
    if (kScanKeys.count(key)) continue;
    if (key == "noise.i0") {
      cfg.noise.i0 = parse_double(value, key);
    } else if (key == "noise.sigma2") {
      cfg.noise.sigma2 = parse_double(value, key);
    } else if (key == "noise.seed") {
      cfg.noise.seed = static_cast<std::uint64_t>(parse_int(value, key));
    } else if (key == "fbp.cutoff") {
      cfg.fbp.cutoff = parse_double(value, key);
    } else if (key == "phantom.test") {
      cfg.test_phantom = value;
    } else if (key == "phantom.train_slices") {
      cfg.train_slices = static_cast<int>(parse_int(value, key));
    } else if (key == "phantom.train_seed") {
      cfg.train_phantom_seed = static_cast<std::uint64_t>(parse_int(value, key));
    } else if (key == "train.layers") {
      cfg.train.layers = static_cast<int>(parse_int(value, key));
    } else if (key == "train.clusters") {
      cfg.train.clusters = parse_int_list(value, key);
    } else if (key == "train.eta") {
      cfg.train.eta = parse_double_list(value, key);
    } else if (key == "train.iterations") {
      cfg.train.iterations = static_cast<int>(parse_int(value, key));
    } else if (key == "train.seed") {
      cfg.train.seed = static_cast<std::uint64_t>(parse_int(value, key));
    } else if (key == "train.patch_side") {
      cfg.train.patch_side = static_cast<int>(parse_int(value, key));
    } else if (key == "train.stride") {
      cfg.train_stride = static_cast<int>(parse_int(value, key));
    } else if (key == "train.kmeans_iters") {
      cfg.train.kmeans_iters = static_cast<int>(parse_int(value, key));
    } else if (key == "recon.beta") {
      cfg.recon.beta = parse_double(value, key);
    } else if (key == "recon.gamma") {
      cfg.recon.gamma = parse_double_list(value, key);
    } else if (key == "recon.outer") {
      cfg.recon.outer = static_cast<int>(parse_int(value, key));
    } else if (key == "recon.inner") {
      cfg.recon.inner = static_cast<int>(parse_int(value, key));
    } else if (key == "recon.alpha") {
      cfg.recon.alpha = parse_double(value, key);
    } else if (key == "recon.nonnegative") {
      cfg.recon.nonnegative = parse_bool(value, key);
    } else if (key == "recon.warm_start") {
      cfg.recon.warm_start = parse_bool(value, key);
    } else if (key == "recon.init") {
      if (value != "fbp" && value != "ep") throw ConfigError(key + ": expected fbp or ep");
      cfg.recon_init = value;
    } else if (key == "recon.stride") {
      cfg.recon.stride = static_cast<int>(parse_int(value, key));
    } else if (key == "ep.beta") {
      cfg.ep.beta = parse_double(value, key);
    } else if (key == "ep.delta") {
      cfg.ep.delta = parse_double(value, key);
    } else if (key == "ep.iterations") {
      cfg.ep.iterations = static_cast<int>(parse_int(value, key));
    } else if (key == "ep.kappa") {
      if (value == "uniform") {
        cfg.ep.kappa = KappaMode::kUniform;
      } else if (value == "statistical") {
        cfg.ep.kappa = KappaMode::kStatistical;
      } else {
        throw ConfigError(key + ": expected uniform or statistical");
      }
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
  cfg.scan.validate();
  cfg.noise.validate();
  cfg.train.validate();
  cfg.recon.validate(cfg.train.layers);
  cfg.ep.validate();
  if (cfg.train_slices < 1) throw ConfigError("phantom.train_slices must be >= 1");
  if (cfg.train_stride < 1) throw ConfigError("train.stride must be >= 1");
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) { return parse(read_text_file(path)); }

std::string ExperimentConfig::to_text() const {
  std::ostringstream os;
  os << geometry_to_text(scan) << '\n';
  os << "[noise]\ni0 = " << fmt(noise.i0) << "\nsigma2 = " << fmt(noise.sigma2) << "\nseed = " << noise.seed
     << "\n\n";
  os << "[fbp]\ncutoff = " << fmt(fbp.cutoff) << "\n\n";
  os << "[phantom]\ntest = " << test_phantom << "\ntrain_slices = " << train_slices
     << "\ntrain_seed = " << train_phantom_seed << "\n\n";
  os << "[train]\nlayers = " << train.layers << "\nclusters = " << join(train.clusters)
     << "\neta = " << join(train.eta) << "\niterations = " << train.iterations << "\nseed = " << train.seed
     << "\npatch_side = " << train.patch_side << "\nstride = " << train_stride
     << "\nkmeans_iters = " << train.kmeans_iters << "\n\n";
  os << "[recon]\nbeta = " << fmt(recon.beta) << "\ngamma = " << join(recon.gamma) << "\nouter = " << recon.outer
     << "\ninner = " << recon.inner << "\nalpha = " << fmt(recon.alpha)
     << "\nnonnegative = " << (recon.nonnegative ? "true" : "false") << "\nstride = " << recon.stride
     << "\nwarm_start = " << (recon.warm_start ? "true" : "false") << "\ninit = " << recon_init << "\n\n";
  os << "[ep]\nbeta = " << fmt(ep.beta) << "\ndelta = " << fmt(ep.delta) << "\niterations = " << ep.iterations
     << "\nkappa = " << kappa_name(ep.kappa) << "\n";
  return os.str();
}

std::string geometry_to_text(const ct::ScanGeometry& g) {
  if (g.height != g.width) throw ConfigError("geometry: only square images are supported in config files");
  std::ostringstream os;
  os << "[scan]\nsize = " << g.height << "\npixel_mm = " << fmt(g.pixel_mm) << "\nviews = " << g.views
     << "\ndetectors = " << g.detectors << "\ndetector_mm = " << fmt(g.detector_mm)
     << "\nattenuation_scale = " << fmt(g.attenuation_scale) << "\n";
  return os.str();
}

ct::ScanGeometry geometry_from_text(const std::string& text) {
  const auto kv = parse_key_values(text);
  for (const auto& [key, value] : kv) {
    if (!kScanKeys.count(key)) throw ConfigError("geometry: unknown key '" + key + "'");
  }
  ct::ScanGeometry g;
  apply_scan(kv, g);
  g.validate();
  return g;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << text;
  if (!os) throw IoError("write failed: " + path.string());
}

}  // namespace mcst
