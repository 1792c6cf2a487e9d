#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gh/anoht_local.hpp"
#include "gh/anoht_tree.hpp"
#include "gh/builder.hpp"
#include "gh/core.hpp"
#include "gh/hc1d.hpp"
#include "gh/survival.hpp"
#include "gh/uniformity.hpp"

namespace {

using gh::ordered_json;

constexpr std::uint64_t kBandSeed = 777;

struct CsvError : std::runtime_error {
  int row;
  CsvError(const std::string& msg, int row_) : std::runtime_error(msg), row(row_) {}
};

struct Options {
  std::string input;
  std::string value_col = "value";
  std::string label_col;
  std::string status_col = "status";
  bool no_standardize = false;
  double l0_fraction = 0.1;
  double l0_abs = 0.0;
  bool has_l0_abs = false;
  std::string linkage = "complete";
  double alpha = 0.05;
  int band_reps = 2000;
  int perm = 10000;
  int mimics = 10000;
  std::uint64_t seed = 1;
  std::string gap_method = "boundary-extension";
  std::string basis = "km";
  bool raw_counts = false;
  std::string out_dir = ".";
  bool svg = false;
};

struct Loaded {
  std::vector<double> values;
  std::optional<std::vector<std::string>> labels;
  std::optional<std::vector<int>> status;
};

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

Loaded load_csv(const Options& opt, bool want_labels, bool want_status) {
  std::ifstream in(opt.input);
  if (!in) throw std::runtime_error("cannot open input file: " + opt.input);

  std::string line;
  if (!std::getline(in, line)) throw CsvError("empty file: " + opt.input, 1);
  std::vector<std::string> header = split_csv_line(line);
  auto col_of = [&](const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return static_cast<int>(i);
    }
    throw CsvError("column '" + name + "' not found in header of " + opt.input, 1);
  };

  int vcol = col_of(opt.value_col);
  int lcol = want_labels ? col_of(opt.label_col) : -1;
  int scol = want_status ? col_of(opt.status_col) : -1;

  Loaded out;
  if (want_labels) out.labels.emplace();
  if (want_status) out.status.emplace();

  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::vector<std::string> fields = split_csv_line(line);
    if (static_cast<int>(fields.size()) <= vcol || (lcol >= 0 && static_cast<int>(fields.size()) <= lcol) ||
        (scol >= 0 && static_cast<int>(fields.size()) <= scol))
      throw CsvError("row " + std::to_string(row) + ": too few fields", row);

    const std::string& vs = fields[static_cast<std::size_t>(vcol)];
    char* end = nullptr;
    double v = std::strtod(vs.c_str(), &end);
    if (vs.empty() || end != vs.c_str() + vs.size())
      throw CsvError("row " + std::to_string(row) + ": cannot parse value '" + vs + "'", row);
    out.values.push_back(v);

    if (lcol >= 0) {
      const std::string& ls = fields[static_cast<std::size_t>(lcol)];
      if (ls.empty()) throw CsvError("row " + std::to_string(row) + ": empty label", row);
      out.labels->push_back(ls);
    }
    if (scol >= 0) {
      const std::string& ss = fields[static_cast<std::size_t>(scol)];
      if (ss == "0") {
        out.status->push_back(0);
      } else if (ss == "1") {
        out.status->push_back(1);
      } else {
        throw CsvError("row " + std::to_string(row) + ": status must be 0 or 1, got '" + ss + "'", row);
      }
    }
  }
  if (out.values.empty()) throw CsvError("no data rows in " + opt.input, row);
  return out;
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", x);
  return buf;
}

std::string fmt2(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", x);
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

ordered_json config_json(const Options& opt, const std::string& command) {
  ordered_json j;
  j["command"] = command;
  j["input"] = opt.input;
  j["value_col"] = opt.value_col;
  if (!opt.label_col.empty()) j["label_col"] = opt.label_col;
  if (command == "survival") j["status_col"] = opt.status_col;
  j["standardize"] = !opt.no_standardize;
  j["l0_fraction"] = opt.l0_fraction;
  if (opt.has_l0_abs) j["l0_abs"] = opt.l0_abs;
  j["linkage"] = opt.linkage;
  j["alpha"] = opt.alpha;
  j["band_replicates"] = opt.band_reps;
  j["seed"] = opt.seed;
  j["gap_method"] = opt.gap_method;
  if (command == "anoht1" || command == "anoht2" || command == "survival")
    j["permutations"] = opt.perm;
  if (command == "anoht2" || command == "survival") j["mimics"] = opt.mimics;
  if (command == "survival") {
    j["basis"] = opt.basis;
    j["raw_counts"] = opt.raw_counts;
  }
  return j;
}

gh::L0Spec l0_spec_of(const Options& opt) {
  gh::L0Spec spec;
  spec.fraction = opt.l0_fraction;
  if (opt.has_l0_abs) spec.abs = opt.l0_abs;
  return spec;
}

struct HistResult {
  gh::Standardized st;
  gh::DessBand band;
  gh::GappedHistogram hist;
  std::vector<gh::GapDecision> junctions;
  std::vector<gh::GapDecision> midpoint_junctions;
  std::vector<int> disagreements;
};

HistResult run_hist_pipeline(const Options& opt, const gh::SortedSample& sorted) {
  HistResult r;
  if (opt.no_standardize) {
    r.st.sample = sorted;
    r.st.mean = 0.0;
    r.st.sd = 1.0;
  } else {
    r.st = gh::standardize(sorted);
  }
  r.band = gh::calibrate_band(static_cast<int>(sorted.size()), opt.alpha, opt.band_reps, kBandSeed);
  r.hist = gh::build_histogram(r.st.sample, l0_spec_of(opt), gh::linkage_from_name(opt.linkage), r.band);

  for (std::size_t k = 0; k + 1 < r.hist.bins.size(); ++k) {
    r.junctions.push_back(
        gh::check_gap_boundaries(r.st.sample, r.hist.bins[k], r.hist.bins[k + 1]));
  }
  if (opt.gap_method == "midpoint") {
    for (std::size_t k = 0; k + 1 < r.hist.bins.size(); ++k) {
      gh::GapDecision d =
          gh::check_gap_midpoint(r.st.sample, r.hist.bins[k], r.hist.bins[k + 1], r.band);
      if (d.is_gap != r.junctions[k].is_gap) r.disagreements.push_back(static_cast<int>(k));
      r.midpoint_junctions.push_back(std::move(d));
    }
  } else if (opt.gap_method != "boundary-extension") {
    throw std::runtime_error("unknown gap method: " + opt.gap_method);
  }
  return r;
}

ordered_json hist_json(const Options& opt, const HistResult& r) {
  ordered_json j;
  j["n"] = r.st.sample.size();
  j["mean"] = r.st.mean;
  j["sd"] = r.st.sd;
  j["band"] = gh::to_json(r.band);
  j["histogram"] = gh::to_json(r.hist);
  ordered_json junctions = ordered_json::array();
  for (const gh::GapDecision& d : r.junctions) junctions.push_back(gh::to_json(d));
  j["junctions"] = std::move(junctions);
  if (opt.gap_method == "midpoint") {
    ordered_json mj = ordered_json::array();
    for (const gh::GapDecision& d : r.midpoint_junctions) mj.push_back(gh::to_json(d));
    j["midpoint_junctions"] = std::move(mj);
    j["gap_method_disagreements"] = r.disagreements;
  }
  ordered_json orig = ordered_json::array();
  for (const gh::Bin& b : r.hist.bins) {
    ordered_json o;
    o["a"] = r.st.mean + r.st.sd * b.a;
    o["b"] = r.st.mean + r.st.sd * b.b;
    orig.push_back(std::move(o));
  }
  j["bins_original_scale"] = std::move(orig);
  j["hamiltonian"] = gh::to_json(gh::hamiltonian(r.hist));
  return j;
}

std::string bins_tsv(const HistResult& r, const std::vector<double>* masses) {
  std::ostringstream out;
  out << "bin\ta\tb\tcount\tdess\tleft_edge\tright_edge\ta_original\tb_original";
  if (masses) out << "\tmass";
  out << "\n";
  for (std::size_t k = 0; k < r.hist.bins.size(); ++k) {
    const gh::Bin& b = r.hist.bins[k];
    out << k << "\t" << fmt(b.a) << "\t" << fmt(b.b) << "\t" << b.count() << "\t" << fmt(b.dess)
        << "\t" << gh::edge_mark_name(b.left_gap) << "\t" << gh::edge_mark_name(b.right_gap)
        << "\t" << fmt(r.st.mean + r.st.sd * b.a) << "\t" << fmt(r.st.mean + r.st.sd * b.b);
    if (masses) out << "\t" << fmt((*masses)[k]);
    out << "\n";
  }
  return out.str();
}

// Minimal, dependency-free plots. Coordinates are fixed-precision so output
// is byte-stable.
struct SvgCanvas {
  std::ostringstream body;
  double width;
  double height;

  SvgCanvas(double w, double h) : width(w), height(h) {}

  void rect(double x, double y, double w, double h, const std::string& fill) {
    body << "<rect x=\"" << fmt2(x) << "\" y=\"" << fmt2(y) << "\" width=\"" << fmt2(w)
         << "\" height=\"" << fmt2(h) << "\" fill=\"" << fill << "\"/>\n";
  }
  void line(double x1, double y1, double x2, double y2, const std::string& stroke,
            const std::string& extra = "") {
    body << "<line x1=\"" << fmt2(x1) << "\" y1=\"" << fmt2(y1) << "\" x2=\"" << fmt2(x2)
         << "\" y2=\"" << fmt2(y2) << "\" stroke=\"" << stroke << "\"" << extra << "/>\n";
  }
  void text(double x, double y, const std::string& s, int size = 11) {
    body << "<text x=\"" << fmt2(x) << "\" y=\"" << fmt2(y) << "\" font-size=\"" << size
         << "\" font-family=\"sans-serif\">" << s << "</text>\n";
  }
  std::string finish() const {
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt2(width) << "\" height=\""
        << fmt2(height) << "\" viewBox=\"0 0 " << fmt2(width) << " " << fmt2(height) << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << body.str() << "</svg>\n";
    return out.str();
  }
};

const char* kPalette[] = {"#4477aa", "#ee6677", "#228833", "#ccbb44",
                          "#66ccee", "#aa3377", "#bbbbbb", "#222255",
                          "#663333", "#225555", "#884411", "#557722"};

std::string svg_histogram(const HistResult& r, const std::vector<double>* masses) {
  const double w = 800, h = 320, ml = 50, mr = 20, mt = 20, mb = 40;
  const auto& bins = r.hist.bins;
  double xmin = bins.front().a, xmax = bins.back().b;
  double span = xmax - xmin;
  if (span <= 0.0) span = 1.0;
  xmin -= 0.03 * span;
  xmax += 0.03 * span;
  double n = 0.0;
  for (const gh::Bin& b : bins) n += b.count();

  double ymax = 0.0;
  std::vector<double> density(bins.size(), 0.0);
  for (std::size_t k = 0; k < bins.size(); ++k) {
    double width = bins[k].b - bins[k].a;
    double mass = masses ? (*masses)[k] : bins[k].count() / n;
    density[k] = width > 0.0 ? mass / width : 0.0;
    ymax = std::max(ymax, density[k]);
  }
  if (ymax <= 0.0) ymax = 1.0;

  SvgCanvas c(w, h);
  auto sx = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (w - ml - mr); };
  auto sy = [&](double y) { return h - mb - y / ymax * (h - mt - mb); };

  for (std::size_t k = 0; k < bins.size(); ++k) {
    const gh::Bin& b = bins[k];
    if (b.b > b.a) {
      c.rect(sx(b.a), sy(density[k]), sx(b.b) - sx(b.a), sy(0) - sy(density[k]), "#4477aa");
    } else {
      c.line(sx(b.a), sy(0), sx(b.a), sy(ymax * 0.5), "#4477aa");
    }
    if (b.right_gap == gh::EdgeMark::gap && k + 1 < bins.size()) {
      c.rect(sx(b.b), mt, sx(bins[k + 1].a) - sx(b.b), h - mt - mb, "#fff0f0");
      c.line(sx(b.b), mt, sx(b.b), h - mb, "#cc3333", " stroke-dasharray=\"4 3\"");
      c.line(sx(bins[k + 1].a), mt, sx(bins[k + 1].a), h - mb, "#cc3333",
             " stroke-dasharray=\"4 3\"");
    }
  }
  c.line(ml, h - mb, w - mr, h - mb, "#000000");
  c.line(ml, mt, ml, h - mb, "#000000");
  c.text(ml, h - mb + 16, fmt2(xmin));
  c.text(w - mr - 40, h - mb + 16, fmt2(xmax));
  c.text(ml - 44, mt + 10, fmt2(ymax));
  c.text(ml - 44, h - mb, "0");
  return c.finish();
}

std::string svg_compositions(const gh::TreatmentMatrix& t) {
  const double w = 800, h = 320, ml = 50, mr = 160, mt = 20, mb = 40;
  int kc = t.n_bins(), jc = t.n_treatments();
  SvgCanvas c(w, h);
  double bar_w = (w - ml - mr) / std::max(1, kc);
  for (int k = 0; k < kc; ++k) {
    double total = 0.0;
    for (int j = 0; j < jc; ++j) total += t.counts[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)];
    if (total <= 0.0) continue;
    double y = h - mb;
    for (int j = 0; j < jc; ++j) {
      double frac = t.counts[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)] / total;
      double seg = frac * (h - mt - mb);
      c.rect(ml + k * bar_w + 2, y - seg, bar_w - 4, seg, kPalette[j % 12]);
      y -= seg;
    }
    c.text(ml + k * bar_w + bar_w / 2 - 4, h - mb + 16, std::to_string(k));
  }
  for (int j = 0; j < jc; ++j) {
    c.rect(w - mr + 10, mt + 18.0 * j, 12, 12, kPalette[j % 12]);
    c.text(w - mr + 28, mt + 18.0 * j + 10, t.treatment_names[static_cast<std::size_t>(j)]);
  }
  c.line(ml, h - mb, w - mr, h - mb, "#000000");
  return c.finish();
}

std::string svg_tree(const gh::TreatmentTree& t, const std::vector<std::string>& names,
                     const gh::AuthenticityReport& report) {
  const double w = 800, h = 60.0 + 24.0 * t.n_leaves, ml = 20, mr = 220, mt = 20;
  double hmax = t.root >= 0 ? t.nodes[static_cast<std::size_t>(t.root)].height : 1.0;
  if (hmax <= 0.0) hmax = 1.0;
  SvgCanvas c(w, h);
  auto sx = [&](double height) { return w - mr - height / hmax * (w - ml - mr); };

  std::vector<double> y(t.nodes.size(), 0.0);
  for (int j = 0; j < t.n_leaves; ++j) {
    y[static_cast<std::size_t>(j)] = mt + 24.0 * j + 12.0;
    c.text(w - mr + 8, y[static_cast<std::size_t>(j)] + 4,
           static_cast<std::size_t>(j) < names.size() ? names[static_cast<std::size_t>(j)]
                                                      : std::to_string(j));
  }
  for (std::size_t id = 0; id < t.nodes.size(); ++id) {
    if (t.is_leaf(static_cast<int>(id))) continue;
    const gh::RowNode& nd = t.nodes[id];
    double yl = y[static_cast<std::size_t>(nd.left)];
    double yr = y[static_cast<std::size_t>(nd.right)];
    y[id] = 0.5 * (yl + yr);
    double x = sx(nd.height);
    double xl = sx(t.nodes[static_cast<std::size_t>(nd.left)].height);
    double xr = sx(t.nodes[static_cast<std::size_t>(nd.right)].height);
    c.line(x, yl, x, yr, "#333333");
    c.line(x, yl, xl, yl, "#333333");
    c.line(x, yr, xr, yr, "#333333");
  }
  double legend_y = mt;
  for (const gh::AuthenticityNode& nd : report.nodes) {
    std::string label = "rank " + std::to_string(nd.rank_digit) + ": " + fmt2(nd.index);
    c.text(ml, legend_y + 10, label);
    legend_y += 16.0;
  }
  return c.finish();
}

std::string svg_survival(const gh::StepEstimate& km, const HistResult& r,
                         const std::vector<double>& masses) {
  const double w = 800, h = 320, ml = 50, mr = 20, mt = 20, mb = 40;
  double xmin = r.hist.bins.front().a, xmax = r.hist.bins.back().b;
  if (!km.times.empty()) {
    xmin = std::min(xmin, km.times.front());
    xmax = std::max(xmax, km.times.back());
  }
  double span = xmax - xmin;
  if (span <= 0.0) span = 1.0;
  xmin -= 0.03 * span;
  xmax += 0.03 * span;

  SvgCanvas c(w, h);
  auto sx = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (w - ml - mr); };
  auto sy = [&](double s) { return mt + (1.0 - s) * (h - mt - mb); };

  for (std::size_t k = 0; k < r.hist.bins.size(); ++k) {
    const gh::Bin& b = r.hist.bins[k];
    double mh = masses[k] * (h - mt - mb);
    if (b.b > b.a) c.rect(sx(b.a), h - mb - mh, sx(b.b) - sx(b.a), mh, "#cfdcec");
  }
  double px = xmin, ps = 1.0;
  for (std::size_t i = 0; i < km.times.size(); ++i) {
    c.line(sx(px), sy(ps), sx(km.times[i]), sy(ps), "#aa3333");
    c.line(sx(km.times[i]), sy(ps), sx(km.times[i]), sy(km.values[i]), "#aa3333");
    px = km.times[i];
    ps = km.values[i];
  }
  c.line(sx(px), sy(ps), sx(xmax), sy(ps), "#aa3333");
  c.line(ml, h - mb, w - mr, h - mb, "#000000");
  c.line(ml, mt, ml, h - mb, "#000000");
  c.text(ml - 20, mt + 10, "1");
  c.text(ml - 20, h - mb, "0");
  return c.finish();
}

void emit(const Options& opt, const ordered_json& result, const std::string& tsv_name,
          const std::string& tsv, const std::vector<std::pair<std::string, std::string>>& svgs) {
  std::filesystem::path dir(opt.out_dir);
  std::filesystem::create_directories(dir);
  write_file(dir / "results.json", result.dump(2) + "\n");
  if (!tsv.empty()) write_file(dir / tsv_name, tsv);
  if (opt.svg) {
    for (const auto& [name, content] : svgs) write_file(dir / name, content);
  }
  std::cout << (dir / "results.json").string() << "\n";
}

ordered_json anoht1_json(const Options& opt, const gh::TreatmentMatrix& t,
                         const std::vector<gh::BinComparison>& comparisons,
                         const gh::GlobalTest& global) {
  ordered_json j;
  j["treatment_matrix"] = gh::to_json(t);
  ordered_json cj = ordered_json::array();
  for (const gh::BinComparison& c : comparisons) cj.push_back(gh::to_json(c));
  j["comparisons"] = std::move(cj);
  j["global"] = gh::to_json(global);
  (void)opt;
  return j;
}

std::vector<gh::BinComparison> run_comparisons(const gh::TreatmentMatrix& t, int perm,
                                               std::uint64_t seed) {
  std::vector<gh::BinComparison> out;
  for (int k = 0; k < t.n_bins(); ++k) {
    gh::BinComparison c;
    c.bin_index = k;
    for (int j = 0; j < t.n_treatments(); ++j)
      c.counts.push_back(t.counts[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)]);
    c.entropy_ratio = gh::entropy_ratio(c.counts, t.n_j);
    c.p_value = gh::bin_pvalue(t, k, perm, seed);
    out.push_back(std::move(c));
  }
  return out;
}

std::string comparisons_tsv(const gh::TreatmentMatrix& t,
                            const std::vector<gh::BinComparison>& comparisons) {
  std::ostringstream out;
  out << "bin";
  for (const std::string& name : t.treatment_names) out << "\t" << name;
  out << "\tentropy_ratio\tp_value\n";
  for (const gh::BinComparison& c : comparisons) {
    out << c.bin_index;
    for (int cnt : c.counts) out << "\t" << cnt;
    out << "\t" << fmt(c.entropy_ratio) << "\t" << fmt(c.p_value) << "\n";
  }
  return out.str();
}

int cmd_hist(const Options& opt) {
  Loaded data = load_csv(opt, false, false);
  gh::SortedSample sorted = gh::sort_sample(data.values);
  HistResult r = run_hist_pipeline(opt, sorted);
  ordered_json out = config_json(opt, "hist");
  out.update(hist_json(opt, r));
  emit(opt, out, "bins.tsv", bins_tsv(r, nullptr), {{"histogram.svg", svg_histogram(r, nullptr)}});
  return 0;
}

int cmd_anoht1(const Options& opt) {
  if (opt.label_col.empty()) throw std::runtime_error("anoht1 requires --label-col");
  Loaded data = load_csv(opt, true, false);
  gh::SortedSample sorted = gh::sort_sample(data.values, data.labels);
  HistResult r = run_hist_pipeline(opt, sorted);
  gh::TreatmentMatrix t = gh::bin_compositions(r.hist, r.st.sample);
  std::vector<gh::BinComparison> comparisons = run_comparisons(t, opt.perm, opt.seed);
  gh::GlobalTest global = gh::global_test(t, opt.perm, opt.seed);

  ordered_json out = config_json(opt, "anoht1");
  out.update(hist_json(opt, r));
  out.update(anoht1_json(opt, t, comparisons, global));
  emit(opt, out, "compositions.tsv", comparisons_tsv(t, comparisons),
       {{"histogram.svg", svg_histogram(r, nullptr)}, {"compositions.svg", svg_compositions(t)}});
  return 0;
}

int cmd_anoht2(const Options& opt) {
  if (opt.label_col.empty()) throw std::runtime_error("anoht2 requires --label-col");
  Loaded data = load_csv(opt, true, false);
  gh::SortedSample sorted = gh::sort_sample(data.values, data.labels);
  HistResult r = run_hist_pipeline(opt, sorted);
  gh::TreatmentMatrix t = gh::bin_compositions(r.hist, r.st.sample);
  std::vector<gh::BinComparison> comparisons = run_comparisons(t, opt.perm, opt.seed);
  gh::GlobalTest global = gh::global_test(t, opt.perm, opt.seed);
  gh::TreatmentTree tree = gh::treatment_tree(gh::row_normalize(t));
  gh::AuthenticityReport report = gh::authenticity(t, opt.mimics, opt.seed);

  ordered_json out = config_json(opt, "anoht2");
  out.update(hist_json(opt, r));
  out.update(anoht1_json(opt, t, comparisons, global));
  out["treatment_tree"] = gh::to_json(tree);
  out["treatments"] = t.treatment_names;
  out["authenticity"] = gh::to_json(report);
  emit(opt, out, "compositions.tsv", comparisons_tsv(t, comparisons),
       {{"histogram.svg", svg_histogram(r, nullptr)},
        {"compositions.svg", svg_compositions(t)},
        {"treatment_tree.svg", svg_tree(tree, t.treatment_names, report)}});
  return 0;
}

int cmd_survival(const Options& opt) {
  bool with_labels = !opt.label_col.empty();
  Loaded data = load_csv(opt, with_labels, true);
  gh::SortedSample sorted = gh::sort_sample(data.values, data.labels, data.status);

  gh::Standardized st;
  if (opt.no_standardize) {
    st.sample = sorted;
    st.mean = 0.0;
    st.sd = 1.0;
  } else {
    st = gh::standardize(sorted);
  }

  int n_events = 0;
  for (int d : *st.sample.status) n_events += d;
  gh::DessBand band = gh::calibrate_band(n_events, opt.alpha, opt.band_reps, kBandSeed);
  gh::CensoredHistogram ch =
      gh::censored_histogram(st.sample, l0_spec_of(opt), gh::linkage_from_name(opt.linkage), band);
  gh::StepEstimate na = gh::nelson_aalen(st.sample);

  HistResult r;
  r.st.sample = ch.uncensored;
  r.st.mean = st.mean;
  r.st.sd = st.sd;
  r.band = band;
  r.hist = ch.histogram;
  for (std::size_t k = 0; k + 1 < r.hist.bins.size(); ++k)
    r.junctions.push_back(gh::check_gap_boundaries(ch.uncensored, r.hist.bins[k], r.hist.bins[k + 1]));

  ordered_json out = config_json(opt, "survival");
  out["n"] = st.sample.size();
  out["n_events"] = n_events;
  out["mean"] = st.mean;
  out["sd"] = st.sd;
  out["band"] = gh::to_json(band);
  out["histogram"] = gh::to_json(ch.histogram);
  ordered_json junctions = ordered_json::array();
  for (const gh::GapDecision& d : r.junctions) junctions.push_back(gh::to_json(d));
  out["junctions"] = std::move(junctions);
  out["masses"] = ch.masses;
  out["km"] = gh::to_json(ch.km);
  out["na"] = gh::to_json(na);
  out["hamiltonian"] = gh::to_json(gh::hamiltonian(ch.histogram));

  std::vector<std::pair<std::string, std::string>> svgs{
      {"survival.svg", svg_survival(ch.km, r, ch.masses)}};

  if (with_labels) {
    gh::TreatmentMatrix t = gh::bin_compositions(ch.histogram, ch.uncensored);
    std::vector<gh::BinComparison> comparisons = run_comparisons(t, opt.perm, opt.seed);
    gh::GlobalTest global = gh::global_test(t, opt.perm, opt.seed);

    // Kaplan-Meier-weighted compositions: per-treatment bin masses scaled
    // by treatment size. Raw uncensored counts drive the permutation tests.
    std::vector<std::vector<double>> weighted;
    std::vector<double> weighted_n(static_cast<std::size_t>(t.n_treatments()), 0.0);
    if (!opt.raw_counts) {
      std::size_t n = st.sample.size();
      std::vector<double> ov(n);
      std::vector<int> od(n);
      std::vector<std::string> ol(n);
      for (std::size_t i = 0; i < n; ++i) {
        std::size_t rr = static_cast<std::size_t>(st.sample.perm[i]);
        ov[rr] = st.sample.values[i];
        od[rr] = (*st.sample.status)[i];
        ol[rr] = (*st.sample.labels)[i];
      }
      for (int j = 0; j < t.n_treatments(); ++j) {
        const std::string& name = t.treatment_names[static_cast<std::size_t>(j)];
        std::vector<double> tv;
        std::vector<int> td;
        for (std::size_t rr = 0; rr < n; ++rr) {
          if (ol[rr] == name) {
            tv.push_back(ov[rr]);
            td.push_back(od[rr]);
          }
        }
        gh::StepEstimate km_j = gh::kaplan_meier(gh::sort_sample(tv, std::nullopt, td));
        std::vector<double> row;
        for (const gh::Bin& b : ch.histogram.bins) {
          double mass = gh::step_value_before(km_j, b.a) - gh::step_value(km_j, b.b);
          row.push_back(static_cast<double>(tv.size()) * mass);
        }
        weighted_n[static_cast<std::size_t>(j)] = static_cast<double>(tv.size());
        weighted.push_back(std::move(row));
      }
    }
    gh::CensoredAuthenticity auth = gh::censored_authenticity(
        st.sample, ch.histogram, opt.mimics, opt.seed, gh::survival_basis_from_name(opt.basis));

    out.update(anoht1_json(opt, t, comparisons, global));
    if (!opt.raw_counts) {
      ordered_json weighted_ratios = ordered_json::array();
      for (int k = 0; k < t.n_bins(); ++k) {
        std::vector<double> column;
        for (int j = 0; j < t.n_treatments(); ++j)
          column.push_back(weighted[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)]);
        weighted_ratios.push_back(gh::entropy_ratio_weighted(column, weighted_n));
      }
      out["weighted_compositions"] = weighted;
      out["weighted_entropy_ratios"] = std::move(weighted_ratios);
    }
    out["treatments"] = auth.treatments;
    out["basis"] = gh::survival_basis_name(auth.basis);
    out["authenticity"] = gh::to_json(auth.report);
    out["warnings"] = auth.warnings;
    svgs.emplace_back("compositions.svg", svg_compositions(t));
  }

  emit(opt, out, "bins.tsv", bins_tsv(r, &ch.masses), svgs);
  return 0;
}

void add_common(CLI::App* cmd, Options& opt, bool with_perm, bool with_mimics, bool survival) {
  cmd->add_option("-i,--input", opt.input, "Input CSV file (header row required)")->required();
  cmd->add_option("--value-col", opt.value_col, "Name of the value column");
  cmd->add_option("--l0-fraction", opt.l0_fraction, "L0 as a fraction of tree height");
  auto* abs = cmd->add_option("--l0-abs", opt.l0_abs, "Absolute L0 override");
  cmd->parse_complete_callback([abs, &opt] { opt.has_l0_abs = abs->count() > 0; });
  cmd->add_option("--linkage", opt.linkage, "complete, average, or ward");
  cmd->add_option("--alpha", opt.alpha, "Band coverage parameter");
  cmd->add_option("--band-reps", opt.band_reps, "Monte Carlo replicates for the band");
  cmd->add_option("--seed", opt.seed, "Seed for permutation and mimic streams");
  cmd->add_option("--gap-method", opt.gap_method, "boundary-extension or midpoint");
  cmd->add_flag("--no-standardize", opt.no_standardize, "Skip centering and rescaling");
  cmd->add_option("--out-dir", opt.out_dir, "Output directory");
  cmd->add_flag("--svg", opt.svg, "Also write SVG plots");
  if (with_perm)
    cmd->add_option("--perm", opt.perm, "Permutation replicates for local tests");
  if (with_mimics)
    cmd->add_option("--mimics", opt.mimics, "Mimic replicates for authenticity");
  if (survival) {
    cmd->add_option("--status-col", opt.status_col, "Event indicator column (1 event, 0 censored)");
    cmd->add_option("--basis", opt.basis, "Authenticity basis: km or na");
    cmd->add_flag("--raw-counts", opt.raw_counts, "Report raw uncensored counts only");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gapped histograms with uniformity-calibrated bins"};
  app.require_subcommand(1);
  app.set_config("--config");

  Options opt;
  CLI::App* hist = app.add_subcommand("hist", "Build a possibly-gapped histogram");
  add_common(hist, opt, false, false, false);
  CLI::App* a1 = app.add_subcommand("anoht1", "Per-bin treatment composition tests");
  add_common(a1, opt, true, false, false);
  a1->add_option("--label-col", opt.label_col, "Treatment label column")->required();
  CLI::App* a2 = app.add_subcommand("anoht2", "Treatment tree authenticity");
  add_common(a2, opt, true, true, false);
  a2->add_option("--label-col", opt.label_col, "Treatment label column")->required();
  CLI::App* surv = app.add_subcommand("survival", "Censored-data histogram and tests");
  add_common(surv, opt, true, true, true);
  surv->add_option("--label-col", opt.label_col, "Treatment label column (optional)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    ordered_json err;
    err["error"] = std::string(e.what());
    std::cerr << err.dump() << "\n";
    return e.get_exit_code() == 0 ? 1 : e.get_exit_code();
  }

  if (const char* env = std::getenv("GH_SEED")) {
    char* end = nullptr;
    unsigned long long v = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0') {
      ordered_json err;
      err["error"] = "GH_SEED must be an unsigned integer";
      std::cerr << err.dump() << "\n";
      return 1;
    }
    opt.seed = v;
  }

  try {
    if (hist->parsed()) return cmd_hist(opt);
    if (a1->parsed()) return cmd_anoht1(opt);
    if (a2->parsed()) return cmd_anoht2(opt);
    if (surv->parsed()) return cmd_survival(opt);
  } catch (const CsvError& e) {
    ordered_json err;
    err["error"] = std::string(e.what());
    err["row"] = e.row;
    std::cerr << err.dump() << "\n";
    return 1;
  } catch (const std::exception& e) {
    ordered_json err;
    err["error"] = std::string(e.what());
    std::cerr << err.dump() << "\n";
    return 1;
  }
  return 0;
}
