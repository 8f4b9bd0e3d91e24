#include "graphtax/profiler.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

#include "graphtax/error.hpp"

namespace graphtax {

namespace {

std::string fmt_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string json_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

int model_rank(ModelKind k) {
  const auto& all = all_models();
  for (size_t i = 0; i < all.size(); ++i)
    if (all[i] == k) return static_cast<int>(i);
  return -1;
}

}  // namespace

std::string run_record_json(const RunRecord& r) {
  std::string auroc = std::isfinite(r.auroc) ? fmt_g(r.auroc) : std::string("null");
  return "{\"dataset\":\"" + json_escape(r.dataset) + "\",\"model\":\"" + json_escape(r.model) +
         "\",\"perturbation\":\"" + json_escape(r.perturbation) +
         "\",\"fold_or_rep\":" + std::to_string(r.fold_or_rep) + ",\"auroc\":" + auroc +
         ",\"epochs_ran\":" + std::to_string(r.epochs_ran) +
         ",\"seed\":" + std::to_string(r.seed) + "}";
}

SensitivityProfile compute_profile(const Dataset& d, const ModelConfig& mc, const TrainConfig& tc,
                                   const std::vector<PerturbationKind>& suite, double flag_margin,
                                   std::vector<RunRecord>* log) {
  int identity_at = -1;
  for (size_t i = 0; i < suite.size(); ++i)
    if (suite[i].tag == PerturbationKind::Tag::Identity) identity_at = static_cast<int>(i);
  if (identity_at < 0) throw InputError("compute_profile: suite must contain identity");

  SensitivityProfile p;
  p.dataset = d.name;
  p.model = mc.kind;
  p.suite = suite;

  for (const PerturbationKind& pk : suite) {
    Dataset pd = apply(pk, d);
    EvalResult r = run_protocol(pd, mc, tc);
    p.raw.push_back(r.mean_auroc);
    p.raw_std.push_back(r.std_auroc);
    if (log) {
      for (const JobResult& j : r.jobs)
        log->push_back({d.name, model_name(mc.kind), pk.name(), j.fold_or_rep, j.auroc,
                        j.epochs_ran, j.seed});
    }
  }

  p.baseline = p.raw[identity_at];
  if (!(p.baseline > 0.0)) throw NumericError("compute_profile: baseline AUROC is zero");
  for (size_t i = 0; i < suite.size(); ++i)
    p.relative.push_back(static_cast<int>(i) == identity_at ? 1.0 : p.raw[i] / p.baseline);
  p.flag = p.baseline < 0.5 + flag_margin;
  return p;
}

namespace {

std::vector<std::string> suite_tokens(const std::vector<PerturbationKind>& suite) {
  std::vector<std::string> out;
  out.reserve(suite.size());
  for (const auto& p : suite) out.push_back(p.name());
  return out;
}

}  // namespace

TaxonomyResult cluster_profiles(const std::vector<SensitivityProfile>& profiles, int n_clusters) {
  if (profiles.empty()) throw InputError("cluster_profiles: no profiles");
  std::vector<std::string> suite = suite_tokens(profiles[0].suite);
  for (const auto& p : profiles)
    if (suite_tokens(p.suite) != suite) throw InputError("cluster_profiles: mismatched suites");

  // Mean relative vector per dataset over the models present.
  std::map<std::string, std::pair<std::vector<double>, int>> acc;
  for (const auto& p : profiles) {
    auto& slot = acc[p.dataset];
    if (slot.second == 0) slot.first.assign(suite.size(), 0.0);
    for (size_t i = 0; i < suite.size(); ++i) slot.first[i] += p.relative[i];
    slot.second += 1;
  }
  int n = static_cast<int>(acc.size());
  if (n < 2) throw InputError("cluster_profiles: need at least 2 datasets");
  if (n_clusters < 1 || n_clusters > n)
    throw InputError("cluster_profiles: n_clusters out of range");

  TaxonomyResult t;
  t.suite = suite;
  t.relatives = Tensor(n, static_cast<int>(suite.size()));
  {
    int r = 0;
    for (const auto& [name, slot] : acc) {  // std::map: lexicographic names
      t.datasets.push_back(name);
      for (size_t i = 0; i < suite.size(); ++i)
        t.relatives.at(r, static_cast<int>(i)) = slot.first[i] / slot.second;
      ++r;
    }
  }

  // Clustering features: relative scores with Identity columns dropped.
  std::vector<int> feat_cols;
  for (size_t i = 0; i < profiles[0].suite.size(); ++i)
    if (profiles[0].suite[i].tag != PerturbationKind::Tag::Identity)
      feat_cols.push_back(static_cast<int>(i));
  int f = static_cast<int>(feat_cols.size());
  if (f == 0) throw InputError("cluster_profiles: suite has no non-identity perturbation");
  Tensor x(n, f);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < f; ++j) x.at(i, j) = t.relatives.at(i, feat_cols[j]);

  // Ward linkage via the Lance-Williams recurrence on squared distances.
  int total = 2 * n - 1;
  std::vector<double> d2(static_cast<size_t>(total) * total, 0.0);
  auto d2at = [&](int a, int b) -> double& { return d2[static_cast<size_t>(a) * total + b]; };
  std::vector<int> sz(total, 0), rep(total, 0);
  std::vector<char> alive(total, 0);
  for (int i = 0; i < n; ++i) {
    sz[i] = 1;
    rep[i] = i;
    alive[i] = 1;
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < f; ++k) {
        double dlt = x.at(i, k) - x.at(j, k);
        s += dlt * dlt;
      }
      d2at(i, j) = d2at(j, i) = s;
    }

  double prev_h = 0.0;
  for (int step = 0; step < n - 1; ++step) {
    int bi = -1, bj = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n + step; ++i) {
      if (!alive[i]) continue;
      for (int j = i + 1; j < n + step; ++j) {
        if (!alive[j]) continue;
        double v = d2at(i, j);
        if (v < best) {
          best = v;
          bi = i;
          bj = j;
        } else if (v == best) {
          int ra = std::min(rep[i], rep[j]), rb = std::max(rep[i], rep[j]);
          int ca = std::min(rep[bi], rep[bj]), cb = std::max(rep[bi], rep[bj]);
          if (ra < ca || (ra == ca && rb < cb)) {
            bi = i;
            bj = j;
          }
        }
      }
    }
    int m = n + step;
    double h = std::sqrt(std::max(0.0, best));
    if (h < prev_h - 1e-9) throw NumericError("cluster_profiles: non-monotone Ward linkage");
    prev_h = std::max(prev_h, h);
    for (int k = 0; k < m; ++k) {
      if (!alive[k] || k == bi || k == bj) continue;
      double v = ((sz[bi] + sz[k]) * d2at(bi, k) + (sz[bj] + sz[k]) * d2at(bj, k) -
                  sz[k] * d2at(bi, bj)) /
                 static_cast<double>(sz[bi] + sz[bj] + sz[k]);
      d2at(m, k) = d2at(k, m) = v;
    }
    sz[m] = sz[bi] + sz[bj];
    rep[m] = std::min(rep[bi], rep[bj]);
    alive[bi] = alive[bj] = 0;
    alive[m] = 1;
    t.merges.push_back({std::min(bi, bj), std::max(bi, bj), h});
  }

  // Flat cut: apply the first n - n_clusters merges, then relabel clusters
  // by first appearance in dataset order.
  std::vector<int> root(total);
  for (int i = 0; i < total; ++i) root[i] = i;
  std::function<int(int)> find = [&](int a) {
    while (root[a] != a) {
      root[a] = root[root[a]];
      a = root[a];
    }
    return a;
  };
  for (int s = 0; s < n - n_clusters; ++s) {
    int m = n + s;
    root[find(t.merges[s].a)] = m;
    root[find(t.merges[s].b)] = m;
  }
  t.cluster_of.assign(n, -1);
  std::map<int, int> relabel;
  for (int i = 0; i < n; ++i) {
    int r = find(i);
    auto it = relabel.find(r);
    if (it == relabel.end()) it = relabel.emplace(r, static_cast<int>(relabel.size())).first;
    t.cluster_of[i] = it->second;
  }
  return t;
}

std::vector<int> dendrogram_order(const TaxonomyResult& t) {
  int n = static_cast<int>(t.datasets.size());
  if (t.merges.empty()) {
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    return order;
  }
  int total = 2 * n - 1;
  std::vector<int> rep(total);
  for (int i = 0; i < n; ++i) rep[i] = i;
  for (size_t s = 0; s < t.merges.size(); ++s)
    rep[n + s] = std::min(rep[t.merges[s].a], rep[t.merges[s].b]);

  std::vector<int> order;
  std::function<void(int)> walk = [&](int id) {
    if (id < n) {
      order.push_back(id);
      return;
    }
    const auto& m = t.merges[id - n];
    int left = rep[m.a] <= rep[m.b] ? m.a : m.b;
    int right = left == m.a ? m.b : m.a;
    walk(left);
    walk(right);
  };
  walk(total - 1);
  return order;
}

void write_profiles_csv(const std::string& path,
                        const std::vector<SensitivityProfile>& profiles) {
  std::vector<const SensitivityProfile*> sorted;
  for (const auto& p : profiles) sorted.push_back(&p);
  std::sort(sorted.begin(), sorted.end(),
            [](const SensitivityProfile* a, const SensitivityProfile* b) {
              if (a->dataset != b->dataset) return a->dataset < b->dataset;
              return model_rank(a->model) < model_rank(b->model);
            });
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "dataset,model,perturbation,raw_auroc,raw_std,relative_score,flag\n";
  for (const auto* p : sorted)
    for (size_t i = 0; i < p->suite.size(); ++i)
      out << p->dataset << ',' << model_name(p->model) << ',' << p->suite[i].name() << ','
          << fmt_g(p->raw[i]) << ',' << fmt_g(p->raw_std[i]) << ',' << fmt_g(p->relative[i])
          << ',' << (p->flag ? 1 : 0) << '\n';
  if (!out) throw IoError("write failed: " + path);
}

std::vector<SensitivityProfile> read_profiles_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path);
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& msg) -> IoError {
    return IoError(path + ":" + std::to_string(lineno) + ": " + msg);
  };
  if (!std::getline(in, line)) throw fail("empty file");
  lineno = 1;
  if (line == "dataset,model,perturbation,raw_auroc,raw_std,relative_score,flag\r")
    line.pop_back();
  if (line != "dataset,model,perturbation,raw_auroc,raw_std,relative_score,flag")
    throw fail("unexpected header");

  std::vector<SensitivityProfile> profiles;
  std::map<std::pair<std::string, std::string>, size_t> index;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 7) throw fail("expected 7 columns");
    try {
      auto key = std::make_pair(cells[0], cells[1]);
      auto it = index.find(key);
      if (it == index.end()) {
        it = index.emplace(key, profiles.size()).first;
        SensitivityProfile p;
        p.dataset = cells[0];
        p.model = parse_model(cells[1]);
        p.flag = cells[6] == "1";
        profiles.push_back(std::move(p));
      }
      SensitivityProfile& p = profiles[it->second];
      PerturbationKind pk = PerturbationKind::parse(cells[2]);
      p.suite.push_back(pk);
      p.raw.push_back(std::stod(cells[3]));
      p.raw_std.push_back(std::stod(cells[4]));
      p.relative.push_back(std::stod(cells[5]));
      if (pk.tag == PerturbationKind::Tag::Identity) p.baseline = p.raw.back();
    } catch (const IoError&) {
      throw;
    } catch (const std::exception& e) {
      throw fail(e.what());
    }
  }
  return profiles;
}

void write_taxonomy_json(const std::string& path, const TaxonomyResult& t) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "{\"suite\":[";
  for (size_t i = 0; i < t.suite.size(); ++i)
    out << (i ? "," : "") << '"' << json_escape(t.suite[i]) << '"';
  out << "],\"datasets\":[";
  for (size_t i = 0; i < t.datasets.size(); ++i)
    out << (i ? "," : "") << '"' << json_escape(t.datasets[i]) << '"';
  out << "],\"merges\":[";
  for (size_t i = 0; i < t.merges.size(); ++i)
    out << (i ? "," : "") << '[' << t.merges[i].a << ',' << t.merges[i].b << ','
        << fmt_g(t.merges[i].dist) << ']';
  out << "],\"clusters\":{";
  for (size_t i = 0; i < t.datasets.size(); ++i)
    out << (i ? "," : "") << '"' << json_escape(t.datasets[i]) << "\":" << t.cluster_of[i];
  out << "}}\n";
  if (!out) throw IoError("write failed: " + path);
}

namespace {

// White at 1.0, red toward lower relative scores, blue toward higher.
std::string heat_color(double v) {
  double dev = std::clamp(v - 1.0, -0.5, 0.5) / 0.5;
  int r = 255, g = 255, b = 255;
  if (dev < 0) {
    double s = -dev;
    r = static_cast<int>(std::lround(255 + (178 - 255) * s));
    g = static_cast<int>(std::lround(255 + (24 - 255) * s));
    b = static_cast<int>(std::lround(255 + (43 - 255) * s));
  } else if (dev > 0) {
    double s = dev;
    r = static_cast<int>(std::lround(255 + (33 - 255) * s));
    g = static_cast<int>(std::lround(255 + (102 - 255) * s));
    b = static_cast<int>(std::lround(255 + (172 - 255) * s));
  }
  char buf[8];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
  return buf;
}

std::string fmt_px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '&')
      out += "&amp;";
    else if (c == '<')
      out += "&lt;";
    else if (c == '>')
      out += "&gt;";
    else
      out.push_back(c);
  }
  return out;
}

}  // namespace

void write_heatmap_svg(const std::string& path, const TaxonomyResult& t) {
  int n = static_cast<int>(t.datasets.size());
  int cols = static_cast<int>(t.suite.size());
  std::vector<int> order = dendrogram_order(t);

  const double cell_w = 26.0, cell_h = 22.0;
  const double dendro_w = 140.0, pad = 10.0;
  size_t max_name = 0;
  for (const auto& d : t.datasets) max_name = std::max(max_name, d.size());
  const double label_w = 10.0 + 7.0 * static_cast<double>(max_name);
  size_t max_col = 0;
  for (const auto& s : t.suite) max_col = std::max(max_col, s.size());
  const double top_h = 14.0 + 6.3 * static_cast<double>(max_col);
  const double grid_x = pad + dendro_w + label_w;
  const double grid_y = pad + top_h;
  const double width = grid_x + cols * cell_w + pad;
  const double height = grid_y + n * cell_h + pad;

  // Display row of each leaf.
  std::vector<int> row_of(n);
  for (int i = 0; i < n; ++i) row_of[order[i]] = i;

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt_px(width) + "\" height=\"" +
         fmt_px(height) + "\" viewBox=\"0 0 " + fmt_px(width) + " " + fmt_px(height) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<g font-family=\"monospace\" font-size=\"11\">\n";

  // Column labels, rotated.
  for (int j = 0; j < cols; ++j) {
    double x = grid_x + j * cell_w + cell_w * 0.7;
    double y = grid_y - 4.0;
    svg += "<text x=\"" + fmt_px(x) + "\" y=\"" + fmt_px(y) + "\" transform=\"rotate(-60 " +
           fmt_px(x) + " " + fmt_px(y) + ")\">" + xml_escape(t.suite[j]) + "</text>\n";
  }
  // Row labels.
  for (int i = 0; i < n; ++i) {
    double y = grid_y + row_of[i] * cell_h + cell_h * 0.72;
    svg += "<text x=\"" + fmt_px(pad + dendro_w + 4.0) + "\" y=\"" + fmt_px(y) + "\">" +
           xml_escape(t.datasets[i]) + "</text>\n";
  }
  // Cells.
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < cols; ++j) {
      double v = t.relatives.at(i, j);
      double x = grid_x + j * cell_w;
      double y = grid_y + row_of[i] * cell_h;
      svg += "<rect class=\"cell\" x=\"" + fmt_px(x) + "\" y=\"" + fmt_px(y) + "\" width=\"" +
             fmt_px(cell_w - 1.0) + "\" height=\"" + fmt_px(cell_h - 1.0) + "\" fill=\"" +
             heat_color(v) + "\"><title>" + xml_escape(t.datasets[i]) + " / " +
             xml_escape(t.suite[j]) + ": " + fmt_g(v) + "</title></rect>\n";
    }
  }

  // Dendrogram in the left margin (root at the left edge).
  if (!t.merges.empty()) {
    double hmax = std::max(t.merges.back().dist, 1e-12);
    int total = 2 * n - 1;
    std::vector<double> ypos(total, 0.0), hpos(total, 0.0);
    for (int i = 0; i < n; ++i)
      ypos[i] = grid_y + row_of[i] * cell_h + cell_h * 0.5;
    auto xof = [&](double h) { return pad + dendro_w - 6.0 - (h / hmax) * (dendro_w - 12.0); };
    for (size_t s = 0; s < t.merges.size(); ++s) {
      const auto& m = t.merges[s];
      int id = n + static_cast<int>(s);
      double xa = xof(hpos[m.a]), xb = xof(hpos[m.b]), xm = xof(m.dist);
      double ya = ypos[m.a], yb = ypos[m.b];
      svg += "<polyline fill=\"none\" stroke=\"#444444\" stroke-width=\"1\" points=\"" +
             fmt_px(xa) + "," + fmt_px(ya) + " " + fmt_px(xm) + "," + fmt_px(ya) + " " +
             fmt_px(xm) + "," + fmt_px(yb) + " " + fmt_px(xb) + "," + fmt_px(yb) + "\"/>\n";
      ypos[id] = 0.5 * (ya + yb);
      hpos[id] = m.dist;
    }
  }

  svg += "</g>\n</svg>\n";

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << svg;
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace graphtax
