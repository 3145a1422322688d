#include "ipixmatch/config.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "ipixmatch/errors.hpp"

namespace ipix::harness {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

// key=value lines -> map; duplicate or malformed lines are hard errors.
std::map<std::string, std::string> parse_kv(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": empty key or value");
    }
    if (!kv.emplace(key, value).second) {
      throw ConfigError("config: duplicate key '" + key + "'");
    }
  }
  return kv;
}

double to_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "' has non-numeric value '" + value + "'");
  }
}

std::int64_t to_int(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const std::int64_t v = std::stoll(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "' has non-integer value '" + value + "'");
  }
}

std::uint64_t to_u64(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const std::uint64_t v = std::stoull(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "' has non-integer value '" + value + "'");
  }
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError("config: key '" + key + "' must be true/false, got '" + value + "'");
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void validate(const RunConfig& c) {
  if (c.dataset.empty()) throw ConfigError("config: 'dataset' is required");
  if (c.epochs < 1) throw ConfigError("config: epochs must be >= 1");
  if (c.batch_labeled < 1 || c.batch_unlabeled < 1) {
    throw ConfigError("config: batch sizes must be >= 1");
  }
  if (!(c.lr > 0.0)) throw ConfigError("config: lr must be > 0");
  if (!(c.momentum >= 0.0 && c.momentum < 1.0)) {
    throw ConfigError("config: momentum must be in [0,1)");
  }
  if (!(c.ema_m >= 0.0 && c.ema_m <= 1.0)) {
    throw ConfigError("config: ema_m must be in [0,1]");
  }
  if (!(c.tau >= 0.0 && c.tau <= 1.0)) throw ConfigError("config: tau must be in [0,1]");
  if (!(c.temperature > 0.0)) throw ConfigError("config: temperature must be > 0");
  if (!(c.alpha_max >= 0.0)) throw ConfigError("config: alpha_max must be >= 0");
  if (c.warmup_epochs < 1) throw ConfigError("config: warmup_epochs must be >= 1");
  if (c.eval_every < 1) throw ConfigError("config: eval_every must be >= 1");
  if (c.hidden_channels < 1) throw ConfigError("config: hidden_channels must be >= 1");
  if (c.threads < 1) throw ConfigError("config: threads must be >= 1");
}

}  // namespace

std::string method_name(trainer::Method m) {
  switch (m) {
    case trainer::Method::SUP_ONLY: return "SUP_ONLY";
    case trainer::Method::BASELINE_LO: return "BASELINE_LO";
    case trainer::Method::IPIX_KL: return "IPIX_KL";
    case trainer::Method::IPIX_CR: return "IPIX_CR";
  }
  throw InvalidParameterError("method_name: bad enum value");
}

trainer::Method parse_method(const std::string& name) {
  if (name == "SUP_ONLY") return trainer::Method::SUP_ONLY;
  if (name == "BASELINE_LO") return trainer::Method::BASELINE_LO;
  if (name == "IPIX_KL") return trainer::Method::IPIX_KL;
  if (name == "IPIX_CR") return trainer::Method::IPIX_CR;
  throw ConfigError("config: unknown method '" + name +
                    "' (expected SUP_ONLY, BASELINE_LO, IPIX_KL or IPIX_CR)");
}

RunConfig parse_run_config_text(const std::string& text) {
  RunConfig c;
  for (const auto& [key, value] : parse_kv(text)) {
    if (key == "dataset") c.dataset = value;
    else if (key == "method") c.method = parse_method(value);
    else if (key == "seed") c.seed = to_u64(key, value);
    else if (key == "epochs") c.epochs = to_int(key, value);
    else if (key == "batch_labeled") c.batch_labeled = static_cast<std::size_t>(to_int(key, value));
    else if (key == "batch_unlabeled") c.batch_unlabeled = static_cast<std::size_t>(to_int(key, value));
    else if (key == "lr") c.lr = to_double(key, value);
    else if (key == "momentum") c.momentum = to_double(key, value);
    else if (key == "ema_m") c.ema_m = to_double(key, value);
    else if (key == "tau") c.tau = to_double(key, value);
    else if (key == "temperature") c.temperature = to_double(key, value);
    else if (key == "alpha_max") c.alpha_max = to_double(key, value);
    else if (key == "warmup_enabled") c.warmup_enabled = to_bool(key, value);
    else if (key == "warmup_epochs") c.warmup_epochs = to_int(key, value);
    else if (key == "eval_every") c.eval_every = to_int(key, value);
    else if (key == "hidden_channels") c.hidden_channels = static_cast<std::size_t>(to_int(key, value));
    else if (key == "threads") c.threads = static_cast<std::size_t>(to_int(key, value));
    else throw ConfigError("config: unknown key '" + key + "'");
  }
  validate(c);
  return c;
}

RunConfig parse_run_config(const std::filesystem::path& path) {
  return parse_run_config_text(read_text(path));
}

GenConfig parse_gen_config_text(const std::string& text) {
  GenConfig c;
  for (const auto& [key, value] : parse_kv(text)) {
    if (key == "C") c.num_classes = static_cast<std::size_t>(to_int(key, value));
    else if (key == "H") c.height = static_cast<std::size_t>(to_int(key, value));
    else if (key == "W") c.width = static_cast<std::size_t>(to_int(key, value));
    else if (key == "count") c.count = static_cast<std::size_t>(to_int(key, value));
    else if (key == "seed") c.seed = to_u64(key, value);
    else if (key == "noise_sigma") c.noise_sigma = to_double(key, value);
    else if (key == "labeled_fraction") c.labeled_fraction = to_double(key, value);
    else if (key == "labeled_count") c.labeled_count = static_cast<std::size_t>(to_int(key, value));
    else if (key == "split_seed") c.split_seed = to_u64(key, value);
    else throw ConfigError("config: unknown key '" + key + "'");
  }
  if (c.labeled_count == 0) {
    if (!(c.labeled_fraction > 0.0 && c.labeled_fraction <= 1.0)) {
      throw ConfigError("config: labeled_fraction must be in (0,1]");
    }
    c.labeled_count = static_cast<std::size_t>(
        c.labeled_fraction * static_cast<double>(c.count) + 0.5);
    if (c.labeled_count == 0) c.labeled_count = 1;
  }
  if (c.labeled_count > c.count) {
    throw ConfigError("config: labeled_count exceeds count");
  }
  if (c.split_seed == 0) c.split_seed = c.seed;
  return c;
}

GenConfig parse_gen_config(const std::filesystem::path& path) {
  return parse_gen_config_text(read_text(path));
}

std::string canonical_text(const RunConfig& c) {
  char buf[64];
  auto fmt = [&buf](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  std::ostringstream out;
  out << "alpha_max = " << fmt(c.alpha_max) << "\n"
      << "batch_labeled = " << c.batch_labeled << "\n"
      << "batch_unlabeled = " << c.batch_unlabeled << "\n"
      << "dataset = " << c.dataset << "\n"
      << "ema_m = " << fmt(c.ema_m) << "\n"
      << "epochs = " << c.epochs << "\n"
      << "eval_every = " << c.eval_every << "\n"
      << "hidden_channels = " << c.hidden_channels << "\n"
      << "lr = " << fmt(c.lr) << "\n"
      << "method = " << method_name(c.method) << "\n"
      << "momentum = " << fmt(c.momentum) << "\n"
      << "seed = " << c.seed << "\n"
      << "tau = " << fmt(c.tau) << "\n"
      << "temperature = " << fmt(c.temperature) << "\n"
      << "threads = " << c.threads << "\n"
      << "warmup_enabled = " << (c.warmup_enabled ? "true" : "false") << "\n"
      << "warmup_epochs = " << c.warmup_epochs << "\n";
  return out.str();
}

std::uint64_t config_hash(const RunConfig& cfg) {
  // FNV-1a over the canonical text; `threads` is excluded so parallelism
  // width never changes the run identity.
  std::string text;
  std::istringstream in(canonical_text(cfg));
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("threads", 0) == 0) continue;
    text += line;
    text += '\n';
  }
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace ipix::harness
