// harness/harness-report.h

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


#ifndef ADAPTLAB_HARNESS_HARNESS_REPORT_H_
#define ADAPTLAB_HARNESS_HARNESS_REPORT_H_

#include <optional>
#include <string>
#include <vector>

#include "harness/harness.h"

namespace adaptlab {

// results.csv columns, in order:
//   speaker_id,severity,method,size,rho,status,test_error,cv_error,
//   train_error,adapted_params,epochs,base_crc,failure
// rho is empty for methods without KLD; status is "ok" or "failed"; reals
// use %.17g so parsing restores them bit-exactly; base_crc is the CRC-32 of
// the adapted model's SI tensors in hex. The journal appends wall_time.
extern const char *const kResultsHeader;

std::string FormatRecord(const CellRecord &r, bool with_wall_time);
std::string FormatResultsCsv(const std::vector<CellRecord> &records);

/// Parses results (or journal) text. Throws FormatError naming the line.
std::vector<CellRecord> ParseResultsCsvText(const std::string &text,
                                            bool with_wall_time = false);

/// Writes atomically through a temporary file. Throws IoError.
void EmitCsv(const std::vector<CellRecord> &records, const std::string &path);
std::vector<CellRecord> ParseResultsCsv(const std::string &path);

void WriteTextFile(const std::string &path, const std::string &text);
std::string ReadTextFile(const std::string &path);

struct GroupRow {
  Severity severity = Severity::kSlight;
  std::string method;
  std::optional<double> rho;
  int size = 0;
  int speakers = 0;  // successful cells aggregated
  int failed = 0;
  double mean_error = 0.0;
  double min_error = 0.0;
  double max_error = 0.0;
  size_t adapted_params = 0;
};

/// Mean/min/max test error per (severity, method, rho, size). Rows with no
/// successful cell keep zero errors and a nonzero failed count.
std::vector<GroupRow> GroupReport(const std::vector<CellRecord> &records);
std::string FormatGroupReport(const std::vector<GroupRow> &rows);

/// Collapses every rho-grid method to one record per (speaker, size) with
/// rho chosen on CV error. Other records pass through. Ties go to the
/// smaller rho.
std::vector<CellRecord> SelectBestRho(const std::vector<CellRecord> &records,
                                      RhoSelection mode);

struct BaselineGroup {
  Severity severity = Severity::kSlight;
  int speakers = 0;
  double mean_error = 0.0;
};

/// Groups present in the roster, ordered slight, medium, heavy.
std::vector<BaselineGroup> BaselineGroups(const std::vector<BaselineRow> &rows);
std::string FormatBaselineTable(const std::vector<BaselineRow> &rows);

struct ParamCountRow {
  std::string method;
  size_t adapted = 0;
  size_t total = 0;
};

std::vector<ParamCountRow> ParamCountReport(const std::vector<std::string> &methods,
                                            const NetworkSpec &spec);
std::string FormatParamCounts(const std::vector<ParamCountRow> &rows);

// Plot files are long-format CSV with header "series,size,mean_error", one
// series per method (or per speaker / rho value) and x = adaptation size.
extern const char *const kPlotHeader;

struct PlotPoint {
  std::string series;
  int size = 0;
  double mean_error = 0.0;
};

/// Mean test error per (method, size) over the speakers passing `filter`.
/// rho-grid methods must already be collapsed by SelectBestRho.
std::vector<PlotPoint> MethodSeries(const std::vector<CellRecord> &records,
                                    std::optional<Severity> filter = {});

/// KLD error per rho value plus "rsi" as the rho = 0 reference.
std::vector<PlotPoint> RhoSeries(const std::vector<CellRecord> &records);

/// One series per speaker for a single collapsed method.
std::vector<PlotPoint> SpeakerSeries(const std::vector<CellRecord> &records,
                                     const std::string &method);

std::string FormatPlot(const std::vector<PlotPoint> &points);

/// Writes summary.csv, kld_rho.csv, kld_speakers.csv and
/// accent_{slight,medium,heavy}.csv into dir. Returns the paths written.
std::vector<std::string> EmitPlotData(const std::vector<CellRecord> &records,
                                      RhoSelection mode, const std::string &dir);

}  // namespace adaptlab

#endif  // ADAPTLAB_HARNESS_HARNESS_REPORT_H_
