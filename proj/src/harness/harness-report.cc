// harness/harness-report.cc

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


#include "harness/harness-report.h"

#include <algorithm>
#include <charconv>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <tuple>

#include "adapt/adapt.h"
#include "base/adaptlab-error.h"

namespace adaptlab {

namespace fs = std::filesystem;

const char *const kResultsHeader =
    "speaker_id,severity,method,size,rho,status,test_error,cv_error,"
    "train_error,adapted_params,epochs,base_crc,failure";

const char *const kPlotHeader = "series,size,mean_error";

namespace {

std::string Real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> SplitFields(const std::string &line) {
  std::vector<std::string> out;
  size_t pos = 0;
  for (;;) {
    const size_t comma = line.find(',', pos);
    out.push_back(line.substr(pos, comma - pos));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

template <typename T>
bool ParseField(const std::string &s, T *out, int base = 10) {
  const char *end = s.data() + s.size();
  std::from_chars_result r;
  if constexpr (std::is_floating_point_v<T>) {
    r = std::from_chars(s.data(), end, *out);
  } else {
    r = std::from_chars(s.data(), end, *out, base);
  }
  return !s.empty() && r.ec == std::errc() && r.ptr == end;
}

}  // namespace

std::string FormatRecord(const CellRecord &r, bool with_wall_time) {
  char crc[16];
  std::snprintf(crc, sizeof(crc), "%08" PRIx32, r.base_crc);
  std::string line = r.speaker_id + "," + std::string(SeverityName(r.severity)) +
                     "," + r.method + "," + std::to_string(r.size) + "," +
                     (r.rho ? Real(*r.rho) : "") + "," + (r.ok ? "ok" : "failed") +
                     "," + Real(r.test_error) + "," + Real(r.cv_error) + "," +
                     Real(r.train_error) + "," + std::to_string(r.adapted_params) +
                     "," + std::to_string(r.epochs) + "," + crc + "," + r.failure;
  if (with_wall_time) line += "," + Real(r.wall_time);
  return line;
}

std::string FormatResultsCsv(const std::vector<CellRecord> &records) {
  std::string out = std::string(kResultsHeader) + "\n";
  for (const auto &r : records) out += FormatRecord(r, false) + "\n";
  return out;
}

std::vector<CellRecord> ParseResultsCsvText(const std::string &text,
                                            bool with_wall_time) {
  const std::string header =
      std::string(kResultsHeader) + (with_wall_time ? ",wall_time" : "");
  const size_t n_fields = with_wall_time ? 14 : 13;
  std::vector<CellRecord> out;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1) {
      if (line != header)
        throw FormatError("unexpected results header: '" + line + "'");
      continue;
    }
    if (line.empty()) continue;
    // A journal may end in a torn line if the writer was killed.
    const bool last = in.peek() == std::char_traits<char>::eof();
    auto fail = [&](const std::string &what) {
      throw FormatError("results line " + std::to_string(line_no) + ": " + what);
    };
    const auto f = SplitFields(line);
    if (f.size() != n_fields) {
      if (with_wall_time && last && text.back() != '\n') break;
      fail("expected " + std::to_string(n_fields) + " fields, got " +
           std::to_string(f.size()));
    }
    CellRecord r;
    r.speaker_id = f[0];
    try {
      r.severity = ParseSeverity(f[1]);
    } catch (const Error &) {
      fail("bad severity '" + f[1] + "'");
    }
    r.method = f[2];
    if (!ParseField(f[3], &r.size)) fail("bad size");
    if (!f[4].empty()) {
      double rho = 0.0;
      if (!ParseField(f[4], &rho)) fail("bad rho");
      r.rho = rho;
    }
    if (f[5] != "ok" && f[5] != "failed") fail("bad status '" + f[5] + "'");
    r.ok = f[5] == "ok";
    if (!ParseField(f[6], &r.test_error) || !ParseField(f[7], &r.cv_error) ||
        !ParseField(f[8], &r.train_error))
      fail("bad error rate");
    if (!ParseField(f[9], &r.adapted_params)) fail("bad parameter count");
    if (!ParseField(f[10], &r.epochs)) fail("bad epoch count");
    if (!ParseField(f[11], &r.base_crc, 16)) fail("bad checksum");
    r.failure = f[12];
    if (with_wall_time && !ParseField(f[13], &r.wall_time)) {
      if (last && text.back() != '\n') break;
      fail("bad wall time");
    }
    out.push_back(std::move(r));
  }
  if (line_no == 0) throw FormatError("empty results file");
  return out;
}

void WriteTextFile(const std::string &path, const std::string &text) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp);
    out << text;
    out.flush();
    if (!out) throw IoError("write to " + tmp + " failed");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp + " to " + path + ": " + ec.message());
}

std::string ReadTextFile(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void EmitCsv(const std::vector<CellRecord> &records, const std::string &path) {
  WriteTextFile(path, FormatResultsCsv(records));
}

std::vector<CellRecord> ParseResultsCsv(const std::string &path) {
  try {
    return ParseResultsCsvText(ReadTextFile(path));
  } catch (const FormatError &e) {
    throw FormatError(path + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------

namespace {

// Methods in first-appearance order.
std::vector<std::string> MethodOrder(const std::vector<CellRecord> &records) {
  std::vector<std::string> order;
  for (const auto &r : records)
    if (std::find(order.begin(), order.end(), r.method) == order.end())
      order.push_back(r.method);
  return order;
}

size_t MethodRank(const std::vector<std::string> &order, const std::string &m) {
  return std::find(order.begin(), order.end(), m) - order.begin();
}

}  // namespace

std::vector<GroupRow> GroupReport(const std::vector<CellRecord> &records) {
  const auto order = MethodOrder(records);
  using Key = std::tuple<int, size_t, double, int>;
  std::map<Key, GroupRow> groups;
  for (const auto &r : records) {
    const Key key{static_cast<int>(r.severity), MethodRank(order, r.method),
                  r.rho.value_or(-1.0), r.size};
    auto [it, fresh] = groups.try_emplace(key);
    GroupRow &g = it->second;
    if (fresh) {
      g.severity = r.severity;
      g.method = r.method;
      g.rho = r.rho;
      g.size = r.size;
    }
    if (!r.ok) {
      ++g.failed;
      continue;
    }
    if (g.speakers == 0) {
      g.min_error = g.max_error = r.test_error;
      g.adapted_params = r.adapted_params;
    }
    g.min_error = std::min(g.min_error, r.test_error);
    g.max_error = std::max(g.max_error, r.test_error);
    g.mean_error += r.test_error;
    ++g.speakers;
  }
  std::vector<GroupRow> rows;
  for (auto &[key, g] : groups) {
    if (g.speakers > 0) g.mean_error /= g.speakers;
    rows.push_back(g);
  }
  return rows;
}

std::string FormatGroupReport(const std::vector<GroupRow> &rows) {
  std::string out =
      "severity,method,rho,size,speakers,failed,mean_error,min_error,max_error,"
      "adapted_params\n";
  for (const auto &g : rows) {
    out += std::string(SeverityName(g.severity)) + "," + g.method + "," +
           (g.rho ? Real(*g.rho) : "") + "," + std::to_string(g.size) + "," +
           std::to_string(g.speakers) + "," + std::to_string(g.failed) + "," +
           Real(g.mean_error) + "," + Real(g.min_error) + "," +
           Real(g.max_error) + "," + std::to_string(g.adapted_params) + "\n";
  }
  return out;
}

std::vector<CellRecord> SelectBestRho(const std::vector<CellRecord> &records,
                                      RhoSelection mode) {
  // Group key: (speaker or "", method, size) -> rho -> (sum cv, n).
  using Key = std::tuple<std::string, std::string, int>;
  std::map<Key, std::map<double, std::pair<double, int>>> stats;
  auto key_of = [mode](const CellRecord &r) {
    return Key{mode == RhoSelection::kSpeaker ? r.speaker_id : std::string(),
               r.method, r.size};
  };
  for (const auto &r : records) {
    if (!r.rho) continue;
    auto &s = stats[key_of(r)][*r.rho];
    if (r.ok) {
      s.first += r.cv_error;
      ++s.second;
    }
  }
  std::map<Key, double> chosen;
  for (const auto &[key, by_rho] : stats) {
    double best_rho = by_rho.begin()->first;
    double best = 0.0;
    bool have = false;
    for (const auto &[rho, s] : by_rho) {  // ascending rho
      if (s.second == 0) continue;
      const double mean = s.first / s.second;
      if (!have || mean < best) {
        best = mean;
        best_rho = rho;
        have = true;
      }
    }
    chosen[key] = best_rho;
  }
  std::vector<CellRecord> out;
  for (const auto &r : records) {
    if (!r.rho || chosen.at(key_of(r)) == *r.rho) out.push_back(r);
  }
  return out;
}

std::vector<BaselineGroup> BaselineGroups(const std::vector<BaselineRow> &rows) {
  std::vector<BaselineGroup> out;
  for (Severity s : {Severity::kSlight, Severity::kMedium, Severity::kHeavy}) {
    BaselineGroup g;
    g.severity = s;
    for (const auto &r : rows) {
      if (r.severity != s) continue;
      g.mean_error += r.test_error;
      ++g.speakers;
    }
    if (g.speakers == 0) continue;
    g.mean_error /= g.speakers;
    out.push_back(g);
  }
  return out;
}

std::string FormatBaselineTable(const std::vector<BaselineRow> &rows) {
  std::string out = "speaker_id,severity,magnitude,distortion,cv_error,test_error\n";
  for (const auto &r : rows) {
    out += r.speaker_id + "," + std::string(SeverityName(r.severity)) + "," +
           Real(r.magnitude) + "," + Real(r.distortion) + "," + Real(r.cv_error) +
           "," + Real(r.test_error) + "\n";
  }
  return out;
}

std::vector<ParamCountRow> ParamCountReport(const std::vector<std::string> &methods,
                                            const NetworkSpec &spec) {
  std::vector<ParamCountRow> rows;
  for (const auto &m : methods) {
    const ParamCount c = ParameterCount(AdaptMethod::Parse(m), spec);
    rows.push_back({m, c.adapted, c.total});
  }
  return rows;
}

std::string FormatParamCounts(const std::vector<ParamCountRow> &rows) {
  std::string out = "method,adapted_params,total_params\n";
  for (const auto &r : rows)
    out += r.method + "," + std::to_string(r.adapted) + "," +
           std::to_string(r.total) + "\n";
  return out;
}

namespace {

std::vector<PlotPoint> Series(
    const std::vector<CellRecord> &records,
    const std::function<std::optional<std::string>(const CellRecord &)> &label) {
  std::vector<std::string> order;
  std::map<std::pair<std::string, int>, std::pair<double, int>> acc;
  for (const auto &r : records) {
    if (!r.ok) continue;
    auto name = label(r);
    if (!name) continue;
    if (std::find(order.begin(), order.end(), *name) == order.end())
      order.push_back(*name);
    auto &a = acc[{*name, r.size}];
    a.first += r.test_error;
    ++a.second;
  }
  std::vector<PlotPoint> out;
  for (const auto &name : order) {
    for (const auto &[key, a] : acc) {
      if (key.first == name) out.push_back({name, key.second, a.first / a.second});
    }
  }
  return out;
}

}  // namespace

std::vector<PlotPoint> MethodSeries(const std::vector<CellRecord> &records,
                                    std::optional<Severity> filter) {
  return Series(records, [&](const CellRecord &r) -> std::optional<std::string> {
    if (filter && r.severity != *filter) return std::nullopt;
    return r.method;
  });
}

std::vector<PlotPoint> RhoSeries(const std::vector<CellRecord> &records) {
  return Series(records, [](const CellRecord &r) -> std::optional<std::string> {
    if (r.method == "rsi") return std::string("rsi");
    if (r.method == "kld" && r.rho) return "rho=" + Real(*r.rho);
    return std::nullopt;
  });
}

std::vector<PlotPoint> SpeakerSeries(const std::vector<CellRecord> &records,
                                     const std::string &method) {
  return Series(records, [&](const CellRecord &r) -> std::optional<std::string> {
    if (r.method != method) return std::nullopt;
    return r.speaker_id;
  });
}

std::string FormatPlot(const std::vector<PlotPoint> &points) {
  std::string out = std::string(kPlotHeader) + "\n";
  for (const auto &p : points)
    out += p.series + "," + std::to_string(p.size) + "," + Real(p.mean_error) + "\n";
  return out;
}

std::vector<std::string> EmitPlotData(const std::vector<CellRecord> &records,
                                      RhoSelection mode, const std::string &dir) {
  fs::create_directories(dir);
  const auto best = SelectBestRho(records, mode);
  std::vector<std::pair<std::string, std::vector<PlotPoint>>> files{
      {"summary.csv", MethodSeries(best)},
      {"kld_rho.csv", RhoSeries(records)},
      {"kld_speakers.csv", SpeakerSeries(best, "kld")},
  };
  for (Severity s : {Severity::kSlight, Severity::kMedium, Severity::kHeavy})
    files.push_back({"accent_" + std::string(SeverityName(s)) + ".csv",
                     MethodSeries(best, s)});
  std::vector<std::string> paths;
  for (const auto &[name, points] : files) {
    paths.push_back((fs::path(dir) / name).string());
    WriteTextFile(paths.back(), FormatPlot(points));
  }
  return paths;
}

}  // namespace adaptlab
