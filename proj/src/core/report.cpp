// Copyright 2026 The ppgbench Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ppgbench/core/report.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "ppgbench/core/error.h"

namespace ppgbench {

namespace {

double quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string slug(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else if (!out.empty() && out.back() != '_') {
      out += '_';
    }
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  return out;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::vector<double> aucs(const ExperimentReport& r) {
  std::vector<double> v;
  for (const auto& x : r.reps) v.push_back(x.auc);
  return v;
}

// "68.2 ± 0.3" in percent.
std::string pct(const MeanSem& m) {
  const int digits = m.sem * 100.0 < 0.95 ? 1 : 0;
  return fixed(m.mean * 100.0, digits) + " ± " + fixed(m.sem * 100.0, digits);
}

}  // namespace

BoxStats box_stats(std::span<const double> values) {
  if (values.empty()) throw ValidationError("box_stats: no values");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  BoxStats b;
  b.n = v.size();
  b.min = v.front();
  b.max = v.back();
  b.q1 = quantile(v, 0.25);
  b.median = quantile(v, 0.5);
  b.q3 = quantile(v, 0.75);
  const double iqr = b.q3 - b.q1;
  const double lo_fence = b.q1 - 1.5 * iqr, hi_fence = b.q3 + 1.5 * iqr;
  b.whisker_low = b.q1;
  b.whisker_high = b.q3;
  double sum = 0.0;
  for (double x : v) {
    sum += x;
    if (x < lo_fence || x > hi_fence) {
      b.outliers.push_back(x);
    } else {
      b.whisker_low = std::min(b.whisker_low, x);
      b.whisker_high = std::max(b.whisker_high, x);
    }
  }
  b.mean = sum / static_cast<double>(v.size());
  return b;
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        out.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        out.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.emplace_back();
    } else if (c != '\r') {
      out.back() += c;
    }
  }
  if (quoted) throw ParseError("csv: unterminated quote");
  return out;
}

std::string report_stem(const ExperimentReport& r) {
  char w[32];
  std::snprintf(w, sizeof w, "%g", r.window_s);
  return std::string(to_string(r.task)) + "_" + slug(r.architecture) + "_w" + w;
}

std::string reps_csv(std::span<const ExperimentReport> reports) {
  std::ostringstream out;
  out << "task,architecture,window_s,rep,fold,auc,f1\n";
  for (const auto& r : reports) {
    for (const auto& x : r.reps) {
      out << to_string(r.task) << ',' << csv_field(r.architecture) << ',' << format_number(r.window_s)
          << ',' << x.rep << ',' << x.fold << ',' << format_number(x.auc) << ','
          << format_number(x.f1) << '\n';
    }
  }
  return out.str();
}

std::vector<ExperimentReport> parse_reps_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "task,architecture,window_s,rep,fold,auc,f1") {
    throw ParseError("reps csv: unexpected header");
  }
  std::vector<ExperimentReport> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 7) throw ParseError("reps csv line " + std::to_string(line_no) + ": expected 7 fields");
    try {
      const Task task = parse_task(f[0]);
      const double window = std::stod(f[2]);
      if (out.empty() || out.back().task != task || out.back().architecture != f[1] ||
          out.back().window_s != window) {
        ExperimentReport r;
        r.task = task;
        r.architecture = f[1];
        r.window_s = window;
        out.push_back(std::move(r));
      }
      out.back().reps.push_back({std::stoi(f[3]), std::stoi(f[4]), std::stod(f[5]), std::stod(f[6])});
    } catch (const std::logic_error&) {
      throw ParseError("reps csv line " + std::to_string(line_no) + ": bad number");
    }
  }
  for (auto& r : out) r.aggregate();
  return out;
}

std::string aggregate_csv(std::span<const ExperimentReport> reports) {
  std::ostringstream out;
  out << "task,architecture,window_s,runs,auc_mean,auc_sem,f1_mean,f1_sem,"
         "folds,auc_fold_mean,auc_fold_sem,f1_fold_mean,f1_fold_sem\n";
  for (const auto& r : reports) {
    out << to_string(r.task) << ',' << csv_field(r.architecture) << ',' << format_number(r.window_s)
        << ',' << r.auc.n << ',' << format_number(r.auc.mean) << ',' << format_number(r.auc.sem)
        << ',' << format_number(r.f1.mean) << ',' << format_number(r.f1.sem) << ',';
    if (r.auc_by_fold) {
      out << r.auc_by_fold->n << ',' << format_number(r.auc_by_fold->mean) << ','
          << format_number(r.auc_by_fold->sem) << ',' << format_number(r.f1_by_fold->mean) << ','
          << format_number(r.f1_by_fold->sem);
    } else {
      out << ",,,,";
    }
    out << '\n';
  }
  return out.str();
}

std::string table1_markdown(std::span<const ExperimentReport> reports) {
  // Row order follows first appearance.
  std::vector<std::pair<std::string, double>> rows;
  std::map<std::pair<std::string, double>, std::map<Task, const ExperimentReport*>> cells;
  for (const auto& r : reports) {
    const auto key = std::make_pair(r.architecture, r.window_s);
    if (!cells.count(key)) rows.push_back(key);
    cells[key][r.task] = &r;
  }
  std::ostringstream out;
  out << "| Neural Network | Window Size (s) | Speech AUC | Speech F1 | Gender AUC | Gender F1 | "
         "Verification AUC | Verification F1 |\n";
  out << "|---|---|---|---|---|---|---|---|\n";
  for (const auto& key : rows) {
    char w[32];
    std::snprintf(w, sizeof w, "%g", key.second);
    out << "| " << key.first << " | " << w;
    for (Task t : {Task::kSpeech, Task::kGender, Task::kVerification}) {
      auto it = cells[key].find(t);
      if (it == cells[key].end()) {
        out << " | - | -";
        continue;
      }
      // Gender rows report spread across folds, as the fold is the unit of variation.
      const ExperimentReport& r = *it->second;
      const MeanSem& a = r.auc_by_fold ? *r.auc_by_fold : r.auc;
      const MeanSem& f = r.f1_by_fold ? *r.f1_by_fold : r.f1;
      out << " | " << pct(a) << " | " << pct(f);
    }
    out << " |\n";
  }
  return out.str();
}

std::string boxplot_csv(std::span<const ExperimentReport> reports) {
  std::ostringstream out;
  out << "task,architecture,window_s,n,min,whisker_low,q1,median,q3,whisker_high,max,mean,outliers\n";
  for (const auto& r : reports) {
    const auto v = aucs(r);
    if (v.empty()) continue;
    const BoxStats b = box_stats(v);
    out << to_string(r.task) << ',' << csv_field(r.architecture) << ',' << format_number(r.window_s)
        << ',' << b.n << ',' << format_number(b.min) << ',' << format_number(b.whisker_low) << ','
        << format_number(b.q1) << ',' << format_number(b.median) << ',' << format_number(b.q3)
        << ',' << format_number(b.whisker_high) << ',' << format_number(b.max) << ','
        << format_number(b.mean) << ',' << b.outliers.size() << '\n';
  }
  return out.str();
}

std::string boxplot_svg(std::span<const ExperimentReport> reports, const std::string& title) {
  std::vector<std::pair<std::string, BoxStats>> boxes;
  double lo = 1.0, hi = 0.0;
  for (const auto& r : reports) {
    const auto v = aucs(r);
    if (v.empty()) continue;
    char w[32];
    std::snprintf(w, sizeof w, "%g", r.window_s);
    std::string label = r.architecture + (r.window_s != 1.0 ? std::string(" (") + w + " s)" : "");
    boxes.emplace_back(label, box_stats(v));
    lo = std::min(lo, boxes.back().second.min);
    hi = std::max(hi, boxes.back().second.max);
  }
  if (boxes.empty()) throw ValidationError("boxplot: no values");
  lo = std::floor(lo * 20.0) / 20.0;
  hi = std::ceil(hi * 20.0) / 20.0;
  if (hi - lo < 0.05) hi = lo + 0.05;

  const double left = 70, right = 20, top = 40, bottom = 70;
  const double box_w = 90;
  const double width = left + right + box_w * static_cast<double>(boxes.size());
  const double height = 360;
  const double plot_h = height - top - bottom;
  auto y = [&](double v) { return top + (hi - v) / (hi - lo) * plot_h; };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fixed(width, 0) << "\" height=\""
    << fixed(height, 0) << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << fixed(width / 2, 1) << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
    << xml_escape(title) << "</text>\n";
  for (int i = 0; i <= 4; ++i) {
    const double v = lo + (hi - lo) * i / 4.0;
    s << "<line x1=\"" << fixed(left, 1) << "\" x2=\"" << fixed(width - right, 1) << "\" y1=\""
      << fixed(y(v), 1) << "\" y2=\"" << fixed(y(v), 1) << "\" stroke=\"#ddd\"/>\n";
    s << "<text x=\"" << fixed(left - 6, 1) << "\" y=\"" << fixed(y(v) + 4, 1)
      << "\" text-anchor=\"end\">" << fixed(v, 3) << "</text>\n";
  }
  s << "<text x=\"16\" y=\"" << fixed(top + plot_h / 2, 1) << "\" transform=\"rotate(-90 16 "
    << fixed(top + plot_h / 2, 1) << ")\" text-anchor=\"middle\">AUC</text>\n";
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const auto& [label, b] = boxes[i];
    const double cx = left + box_w * (static_cast<double>(i) + 0.5);
    const double half = box_w * 0.3;
    s << "<line x1=\"" << fixed(cx, 1) << "\" x2=\"" << fixed(cx, 1) << "\" y1=\"" << fixed(y(b.whisker_high), 1)
      << "\" y2=\"" << fixed(y(b.q3), 1) << "\" stroke=\"black\"/>\n";
    s << "<line x1=\"" << fixed(cx, 1) << "\" x2=\"" << fixed(cx, 1) << "\" y1=\"" << fixed(y(b.q1), 1)
      << "\" y2=\"" << fixed(y(b.whisker_low), 1) << "\" stroke=\"black\"/>\n";
    for (double w : {b.whisker_low, b.whisker_high}) {
      s << "<line x1=\"" << fixed(cx - half / 2, 1) << "\" x2=\"" << fixed(cx + half / 2, 1) << "\" y1=\""
        << fixed(y(w), 1) << "\" y2=\"" << fixed(y(w), 1) << "\" stroke=\"black\"/>\n";
    }
    s << "<rect x=\"" << fixed(cx - half, 1) << "\" y=\"" << fixed(y(b.q3), 1) << "\" width=\""
      << fixed(2 * half, 1) << "\" height=\"" << fixed(std::max(0.5, y(b.q1) - y(b.q3)), 1)
      << "\" fill=\"#9ecae1\" stroke=\"black\"/>\n";
    s << "<line x1=\"" << fixed(cx - half, 1) << "\" x2=\"" << fixed(cx + half, 1) << "\" y1=\""
      << fixed(y(b.median), 1) << "\" y2=\"" << fixed(y(b.median), 1)
      << "\" stroke=\"#d62728\" stroke-width=\"2\"/>\n";
    for (double o : b.outliers) {
      s << "<circle cx=\"" << fixed(cx, 1) << "\" cy=\"" << fixed(y(o), 1)
        << "\" r=\"2.5\" fill=\"none\" stroke=\"black\"/>\n";
    }
    s << "<text x=\"" << fixed(cx, 1) << "\" y=\"" << fixed(height - bottom + 18, 1)
      << "\" text-anchor=\"middle\" font-size=\"10\">" << xml_escape(label) << "</text>\n";
    s << "<text x=\"" << fixed(cx, 1) << "\" y=\"" << fixed(height - bottom + 32, 1)
      << "\" text-anchor=\"middle\" font-size=\"10\" fill=\"#555\">n=" << b.n << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace ppgbench
