// harness/harness-config.cc

// Copyright 2026  adaptlab authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.


#include "harness/harness-config.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "base/adaptlab-error.h"
#include "base/rng.h"

namespace adaptlab {

namespace pt = boost::property_tree;

NetworkSpec SiTrainConfig::Spec(const TaskSpec &task) const {
  NetworkSpec spec;
  spec.input_dim = task.feature_dim;
  spec.hidden_dims = hidden_dims;
  spec.output_dim = task.n_classes;
  spec.hidden_activation = activation;
  return spec;
}

std::string_view RhoSelectionName(RhoSelection s) {
  return s == RhoSelection::kGlobal ? "global" : "speaker";
}

RhoSelection ParseRhoSelection(std::string_view name) {
  if (name == "global") return RhoSelection::kGlobal;
  if (name == "speaker") return RhoSelection::kSpeaker;
  throw ConfigError("unknown rho selection '" + std::string(name) +
                    "' (expected global or speaker)");
}

std::vector<std::string> DefaultMethods() {
  return {"lin", "lhuc", "kld", "rsi", "lin+lhuc", "lin+kld", "lhuc+kld",
          "lin+lhuc+kld"};
}

bool UsesRhoGrid(const std::string &method) {
  return method != "rsi" && method.find("kld") != std::string::npos;
}

void ExperimentConfig::Check() const {
  if (methods.empty()) throw ConfigError("no adaptation methods configured");
  std::set<std::string> seen;
  for (const auto &m : methods) {
    AdaptMethod::Parse(m);  // throws on unknown names
    if (!seen.insert(m).second)
      throw ConfigError("method '" + m + "' listed twice");
  }
  if (sizes.empty()) throw ConfigError("no adaptation sizes configured");
  for (int s : sizes) {
    if (s <= 0 || s > splits.adapt_blocks)
      throw ConfigError("adaptation size " + std::to_string(s) +
                        " outside the pool of " +
                        std::to_string(splits.adapt_blocks) + " blocks");
  }
  if (std::set<int>(sizes.begin(), sizes.end()).size() != sizes.size())
    throw ConfigError("duplicate adaptation size");
  bool needs_rho = std::any_of(methods.begin(), methods.end(), UsesRhoGrid);
  if (needs_rho && rho_grid.empty())
    throw ConfigError("KLD methods configured with an empty rho grid");
  for (double r : rho_grid) {
    if (!(r >= 0.0 && r <= 1.0))
      throw ConfigError("rho " + std::to_string(r) + " outside [0, 1]");
  }
  if (std::set<double>(rho_grid.begin(), rho_grid.end()).size() !=
      rho_grid.size())
    throw ConfigError("duplicate rho value");
  if (max_epochs < 0 || patience < 0 || batch_size <= 0)
    throw ConfigError("bad per-cell schedule");
  for (auto lr : {lin_learning_rate, lhuc_learning_rate, kld_learning_rate}) {
    if (lr && !(*lr >= 0.0 && std::isfinite(*lr)))
      throw ConfigError("learning rate must be finite and non-negative");
  }
  if (jobs <= 0) throw ConfigError("jobs must be positive");
  if (splits.adapt_blocks <= 0 || splits.cv_blocks <= 0 ||
      splits.test_blocks <= 0 || task.frames_per_block <= 0)
    throw ConfigError("split sizes must be positive");
  if (si.n_train <= 0 || si.n_test <= 0)
    throw ConfigError("SI corpus sizes must be positive");
  si.Spec(task).Check();
}

size_t ExperimentConfig::NumCells() const {
  const size_t speakers = roster.n_slight + roster.n_medium + roster.n_heavy;
  size_t per_size = 0;
  for (const auto &m : methods) per_size += UsesRhoGrid(m) ? rho_grid.size() : 1;
  return speakers * per_size * sizes.size();
}

AdaptMethod ExperimentConfig::MakeMethod(const std::string &name,
                                         double rho) const {
  AdaptMethod m = AdaptMethod::Parse(name, rho);
  double lr = std::numeric_limits<double>::infinity();
  if (m.use_lin) lr = std::min(lr, lin_learning_rate.value_or(kDefaultLinLearningRate));
  if (m.use_lhuc)
    lr = std::min(lr, lhuc_learning_rate.value_or(kDefaultLhucLearningRate));
  if (m.kld) lr = std::min(lr, kld_learning_rate.value_or(kDefaultKldLearningRate));
  m.schedule.learning_rate = lr;
  if (per_group_rates) {
    if (m.kld)
      m.schedule.learning_rate = kld_learning_rate.value_or(kDefaultKldLearningRate);
    if (m.use_lin)
      m.schedule.lin_learning_rate = lin_learning_rate.value_or(kDefaultLinLearningRate);
    if (m.use_lhuc)
      m.schedule.lhuc_learning_rate =
          lhuc_learning_rate.value_or(kDefaultLhucLearningRate);
  }
  m.schedule.max_epochs = max_epochs;
  m.schedule.patience = patience;
  m.schedule.batch_size = batch_size;
  return m;
}

// ---------------------------------------------------------------------------
// Text helpers.

namespace {

std::string Trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> SplitList(const std::string &text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == ',' || c == ' ' || c == '\t') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

template <typename T>
T ParseNumber(const std::string &text, const char *what) {
  const std::string s = Trim(text);
  T value{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw ConfigError(std::string("cannot parse ") + what + " from '" + text + "'");
  return value;
}

std::string FormatDouble(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

template <typename T>
std::string JoinList(const std::vector<T> &v) {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    if constexpr (std::is_floating_point_v<T>) {
      out += FormatDouble(v[i]);
    } else if constexpr (std::is_arithmetic_v<T>) {
      out += std::to_string(v[i]);
    } else {
      out += v[i];
    }
  }
  return out;
}

// Consumes keys from one INI section, remembering which were used so that
// leftovers can be reported as typos.
class Section {
 public:
  Section(const pt::ptree &root, const std::string &name) : name_(name) {
    if (auto child = root.get_child_optional(name)) tree_ = *child;
  }

  template <typename T>
  void Read(const std::string &key, T *out) {
    auto v = tree_.get_optional<std::string>(key);
    if (!v) return;
    used_.insert(key);
    const std::string what = name_ + "." + key;
    if constexpr (std::is_same_v<T, std::string>) {
      *out = Trim(*v);
    } else if constexpr (std::is_same_v<T, double>) {
      *out = ParseNumber<double>(*v, what.c_str());
    } else {
      *out = ParseNumber<T>(*v, what.c_str());
    }
  }

  template <typename T>
  void ReadOptional(const std::string &key, std::optional<T> *out) {
    if (!tree_.get_optional<std::string>(key)) return;
    T v{};
    Read(key, &v);
    *out = v;
  }

  std::optional<std::string> Raw(const std::string &key) {
    auto v = tree_.get_optional<std::string>(key);
    if (!v) return std::nullopt;
    used_.insert(key);
    return *v;
  }

  void CheckUnused() const {
    for (const auto &kv : tree_) {
      if (!used_.count(kv.first))
        throw ConfigError("unknown key '" + kv.first + "' in section [" +
                          name_ + "]");
    }
  }

 private:
  std::string name_;
  pt::ptree tree_;
  std::set<std::string> used_;
};

}  // namespace

std::vector<int> ParseIntList(const std::string &text) {
  std::vector<int> out;
  for (const auto &item : SplitList(text))
    out.push_back(ParseNumber<int>(item, "integer list"));
  return out;
}

std::vector<double> ParseDoubleList(const std::string &text) {
  std::vector<double> out;
  for (const auto &item : SplitList(text))
    out.push_back(ParseNumber<double>(item, "real list"));
  return out;
}

std::vector<std::string> ParseNameList(const std::string &text) {
  return SplitList(text);
}

ExperimentConfig ParseConfig(const std::string &text) {
  pt::ptree root;
  try {
    std::istringstream in(text);
    pt::read_ini(in, root);
  } catch (const pt::ini_parser_error &e) {
    throw ConfigError(std::string("bad config: ") + e.what());
  }
  static const std::set<std::string> kSections{"task", "roster", "splits", "si",
                                               "sweep"};
  for (const auto &kv : root) {
    if (!kSections.count(kv.first))
      throw ConfigError("unknown config section [" + kv.first + "]");
  }

  ExperimentConfig c;
  {
    Section s(root, "task");
    s.Read("n_classes", &c.task.n_classes);
    s.Read("feature_dim", &c.task.feature_dim);
    s.Read("class_spread", &c.task.class_spread);
    s.Read("within_class_std", &c.task.within_class_std);
    s.Read("frames_per_block", &c.task.frames_per_block);
    s.Read("seed", &c.task.seed);
    s.CheckUnused();
  }
  {
    Section s(root, "roster");
    auto &r = c.roster;
    s.Read("n_slight", &r.n_slight);
    s.Read("n_medium", &r.n_medium);
    s.Read("n_heavy", &r.n_heavy);
    for (auto [name, range] : {std::pair{"slight", &r.slight},
                               std::pair{"medium", &r.medium},
                               std::pair{"heavy", &r.heavy}}) {
      if (auto v = s.Raw(name)) {
        auto lohi = ParseDoubleList(*v);
        if (lohi.size() != 2)
          throw ConfigError(std::string("roster.") + name +
                            " needs two values: lo, hi");
        *range = SeverityRange{lohi[0], lohi[1]};
      }
    }
    s.Read("matrix_scale", &r.matrix_scale);
    s.Read("shift_scale", &r.shift_scale);
    s.Read("class_shift_scale", &r.class_shift_scale);
    s.Read("noise_scale", &r.noise_scale);
    s.Read("seed", &r.seed);
    s.CheckUnused();
  }
  {
    Section s(root, "splits");
    s.Read("adapt_blocks", &c.splits.adapt_blocks);
    s.Read("cv_blocks", &c.splits.cv_blocks);
    s.Read("test_blocks", &c.splits.test_blocks);
    s.CheckUnused();
  }
  {
    Section s(root, "si");
    if (auto v = s.Raw("hidden_dims")) c.si.hidden_dims = ParseIntList(*v);
    if (auto v = s.Raw("activation")) c.si.activation = ParseActivation(Trim(*v));
    s.Read("n_train", &c.si.n_train);
    s.Read("n_test", &c.si.n_test);
    s.Read("init_seed", &c.si.init_seed);
    s.Read("learning_rate", &c.si.schedule.learning_rate);
    s.Read("max_epochs", &c.si.schedule.max_epochs);
    s.Read("patience", &c.si.schedule.patience);
    s.Read("batch_size", &c.si.schedule.batch_size);
    s.Read("seed", &c.si.schedule.seed);
    s.CheckUnused();
  }
  {
    Section s(root, "sweep");
    if (auto v = s.Raw("methods")) c.methods = ParseNameList(*v);
    if (auto v = s.Raw("sizes")) c.sizes = ParseIntList(*v);
    if (auto v = s.Raw("rho_grid")) c.rho_grid = ParseDoubleList(*v);
    s.Read("max_epochs", &c.max_epochs);
    s.Read("patience", &c.patience);
    s.Read("batch_size", &c.batch_size);
    s.ReadOptional("lin_learning_rate", &c.lin_learning_rate);
    s.ReadOptional("lhuc_learning_rate", &c.lhuc_learning_rate);
    s.ReadOptional("kld_learning_rate", &c.kld_learning_rate);
    if (auto v = s.Raw("per_group_rates")) {
      const std::string b = Trim(*v);
      if (b == "true" || b == "1") c.per_group_rates = true;
      else if (b == "false" || b == "0") c.per_group_rates = false;
      else
        throw ConfigError("[sweep] per_group_rates: expected true or false, got '" +
                          b + "'");
    }
    if (auto v = s.Raw("best_rho")) c.rho_selection = ParseRhoSelection(Trim(*v));
    s.Read("seed", &c.seed);
    s.Read("jobs", &c.jobs);
    s.CheckUnused();
  }
  c.Check();
  return c;
}

ExperimentConfig LoadConfig(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return ParseConfig(ss.str());
  } catch (const ConfigError &e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::string DumpConfig(const ExperimentConfig &c) {
  std::ostringstream o;
  auto range = [](const SeverityRange &r) {
    return FormatDouble(r.lo) + "," + FormatDouble(r.hi);
  };
  o << "[task]\n"
    << "n_classes = " << c.task.n_classes << "\n"
    << "feature_dim = " << c.task.feature_dim << "\n"
    << "class_spread = " << FormatDouble(c.task.class_spread) << "\n"
    << "within_class_std = " << FormatDouble(c.task.within_class_std) << "\n"
    << "frames_per_block = " << c.task.frames_per_block << "\n"
    << "seed = " << c.task.seed << "\n\n";
  o << "[roster]\n"
    << "n_slight = " << c.roster.n_slight << "\n"
    << "n_medium = " << c.roster.n_medium << "\n"
    << "n_heavy = " << c.roster.n_heavy << "\n"
    << "slight = " << range(c.roster.slight) << "\n"
    << "medium = " << range(c.roster.medium) << "\n"
    << "heavy = " << range(c.roster.heavy) << "\n"
    << "matrix_scale = " << FormatDouble(c.roster.matrix_scale) << "\n"
    << "shift_scale = " << FormatDouble(c.roster.shift_scale) << "\n"
    << "class_shift_scale = " << FormatDouble(c.roster.class_shift_scale) << "\n"
    << "noise_scale = " << FormatDouble(c.roster.noise_scale) << "\n"
    << "seed = " << c.roster.seed << "\n\n";
  o << "[splits]\n"
    << "adapt_blocks = " << c.splits.adapt_blocks << "\n"
    << "cv_blocks = " << c.splits.cv_blocks << "\n"
    << "test_blocks = " << c.splits.test_blocks << "\n\n";
  o << "[si]\n"
    << "hidden_dims = " << JoinList(c.si.hidden_dims) << "\n"
    << "activation = " << ActivationName(c.si.activation) << "\n"
    << "n_train = " << c.si.n_train << "\n"
    << "n_test = " << c.si.n_test << "\n"
    << "init_seed = " << c.si.init_seed << "\n"
    << "learning_rate = " << FormatDouble(c.si.schedule.learning_rate) << "\n"
    << "max_epochs = " << c.si.schedule.max_epochs << "\n"
    << "patience = " << c.si.schedule.patience << "\n"
    << "batch_size = " << c.si.schedule.batch_size << "\n"
    << "seed = " << c.si.schedule.seed << "\n\n";
  o << "[sweep]\n"
    << "methods = " << JoinList(c.methods) << "\n"
    << "sizes = " << JoinList(c.sizes) << "\n"
    << "rho_grid = " << JoinList(c.rho_grid) << "\n"
    << "max_epochs = " << c.max_epochs << "\n"
    << "patience = " << c.patience << "\n"
    << "batch_size = " << c.batch_size << "\n";
  if (c.lin_learning_rate)
    o << "lin_learning_rate = " << FormatDouble(*c.lin_learning_rate) << "\n";
  if (c.lhuc_learning_rate)
    o << "lhuc_learning_rate = " << FormatDouble(*c.lhuc_learning_rate) << "\n";
  if (c.kld_learning_rate)
    o << "kld_learning_rate = " << FormatDouble(*c.kld_learning_rate) << "\n";
  if (c.per_group_rates) o << "per_group_rates = true\n";
  o << "best_rho = " << RhoSelectionName(c.rho_selection) << "\n"
    << "seed = " << c.seed << "\n"
    << "jobs = " << c.jobs << "\n";
  return o.str();
}

uint64_t ExperimentConfig::SiFingerprint() const {
  // Only the [task] and [si] sections reach the SI network.
  const std::string text = DumpConfig(*this);
  const auto begin = text.find("[task]");
  const auto roster = text.find("[roster]");
  const auto si = text.find("[si]");
  const auto sweep = text.find("[sweep]");
  return HashString(text.substr(begin, roster - begin) +
                    text.substr(si, sweep - si));
}

}  // namespace adaptlab
