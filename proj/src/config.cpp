#include "spsg/config.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace spsg {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument("not a boolean: " + v);
}

}  // namespace

std::vector<double> parse_alpha_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    std::size_t used = 0;
    const double v = std::stod(item, &used);
    if (used != item.size()) throw std::invalid_argument("bad alpha value: " + item);
    out.push_back(v);
  }
  return out;
}

std::map<std::string, std::string> parse_key_values(const std::string& text) {
  std::map<std::string, std::string> pairs;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("config line " + std::to_string(lineno) + ": missing '='");
    pairs[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return pairs;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  RunConfig cfg;
  cfg.apply(parse_key_values(buf.str()));
  return cfg;
}

void RunConfig::apply(const std::map<std::string, std::string>& pairs) {
  for (const auto& [key, value] : pairs) {
    if (key == "image") image = value;
    else if (key == "output_dir") output_dir = value;
    else if (key == "superpixels") superpixels = value;
    else if (key == "slic") slic_count = std::stoi(value);
    else if (key == "slic_compactness") slic_compactness = std::stod(value);
    else if (key == "slic_iterations") slic_iterations = std::stoi(value);
    else if (key == "boundary") boundary = value;
    else if (key == "window_radius") window_radius = std::stoi(value);
    else if (key == "bins_per_filter") bins_per_filter = std::stoi(value);
    else if (key == "dict_size") dict_size = std::stoi(value);
    else if (key == "nmf_iterations") nmf_iterations = std::stoi(value);
    else if (key == "gamma") gamma = std::stod(value);
    else if (key == "sigma_x") sigma_x = value == "auto" ? std::nullopt : std::optional<double>(std::stod(value));
    else if (key == "mu") mu = std::stod(value);
    else if (key == "tol") tol = std::stod(value);
    else if (key == "max_iters") max_iters = std::stoi(value);
    else if (key == "alphas") alphas = parse_alpha_list(value);
    else if (key == "seed") seed = std::stoull(value);
    else if (key == "warm_start") warm_start = parse_bool(value);
    else if (key == "feature_cache") feature_cache = value;
    else if (key == "dict_cache") dict_cache = value;
    else if (key == "trace") trace = value;
    else throw std::invalid_argument("unknown config key: " + key);
  }
}

std::string RunConfig::to_text() const {
  std::ostringstream os;
  os << "image = " << image << '\n';
  os << "output_dir = " << output_dir << '\n';
  os << "superpixels = " << superpixels << '\n';
  os << "slic = " << slic_count << '\n';
  os << "slic_compactness = " << format_double(slic_compactness) << '\n';
  os << "slic_iterations = " << slic_iterations << '\n';
  os << "boundary = " << boundary << '\n';
  os << "window_radius = " << window_radius << '\n';
  os << "bins_per_filter = " << bins_per_filter << '\n';
  os << "dict_size = " << dict_size << '\n';
  os << "nmf_iterations = " << nmf_iterations << '\n';
  os << "gamma = " << format_double(gamma) << '\n';
  os << "sigma_x = " << (sigma_x ? format_double(*sigma_x) : std::string("auto")) << '\n';
  os << "mu = " << format_double(mu) << '\n';
  os << "tol = " << format_double(tol) << '\n';
  os << "max_iters = " << max_iters << '\n';
  os << "alphas = ";
  for (std::size_t k = 0; k < alphas.size(); ++k) os << (k ? "," : "") << format_double(alphas[k]);
  os << '\n';
  os << "seed = " << seed << '\n';
  os << "warm_start = " << (warm_start ? "true" : "false") << '\n';
  os << "feature_cache = " << feature_cache << '\n';
  os << "dict_cache = " << dict_cache << '\n';
  os << "trace = " << trace << '\n';
  return os.str();
}

void RunConfig::validate() const {
  if (image.empty()) throw std::invalid_argument("no input image");
  const bool imported = !superpixels.empty();
  const bool builtin = slic_count > 0;
  if (imported == builtin) throw std::invalid_argument("specify exactly one of --superpixels or --slic");
  if (builtin && slic_count < 2) throw std::invalid_argument("--slic must be >= 2");
  if (slic_iterations < 1) throw std::invalid_argument("slic_iterations must be >= 1");
  if (window_radius < 1) throw std::invalid_argument("window_radius must be >= 1");
  if (bins_per_filter < 2) throw std::invalid_argument("bins_per_filter must be >= 2");
  if (dict_size < 1) throw std::invalid_argument("dict_size must be >= 1");
  if (nmf_iterations < 0) throw std::invalid_argument("nmf_iterations must be >= 0");
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw std::invalid_argument("gamma must be finite and >= 0");
  if (sigma_x && !(*sigma_x > 0.0)) throw std::invalid_argument("sigma_x must be positive");
  if (!(mu > 0.0)) throw std::invalid_argument("mu must be positive");
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
  if (max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
  for (double a : alphas)
    if (!(a >= 0.0) || !std::isfinite(a)) throw std::invalid_argument("alpha values must be finite and >= 0");
}

}  // namespace spsg
