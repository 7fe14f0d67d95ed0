#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "grid.hpp"

namespace radonlab {

inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

using Cell = std::variant<double, int64_t, std::string>;

inline std::string format_cell(const Cell& c) {
  if (auto d = std::get_if<double>(&c)) return format_number(*d);
  if (auto i = std::get_if<int64_t>(&c)) return std::to_string(*i);
  const std::string& s = std::get<std::string>(c);
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return q + "\"";
}

// A CSV table: a comment row echoing the spec, a header row, then data.
struct CsvTable {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> row) {
    require(row.size() == columns.size(), "CsvTable " + name + ": row has " + std::to_string(row.size()) +
                                              " cells, header has " + std::to_string(columns.size()));
    rows.push_back(std::move(row));
  }

  std::string render(const nlohmann::json& spec_echo) const {
    std::ostringstream out;
    out << "# spec: " << spec_echo.dump() << "\n";
    for (size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << columns[i];
    out << "\n";
    for (auto& r : rows) {
      for (size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << format_cell(r[i]);
      out << "\n";
    }
    return out.str();
  }

  std::vector<double> column(const std::string& c) const {
    size_t k = 0;
    while (k < columns.size() && columns[k] != c) ++k;
    require(k < columns.size(), "CsvTable " + name + ": no column " + c);
    std::vector<double> out;
    for (auto& r : rows) {
      if (auto d = std::get_if<double>(&r[k])) out.push_back(*d);
      else if (auto i = std::get_if<int64_t>(&r[k])) out.push_back(static_cast<double>(*i));
      else out.push_back(NAN);
    }
    return out;
  }
};

struct Series {
  std::string label;
  std::vector<double> x, y;
};

// Minimal line chart; log axes drop nonpositive samples.
inline std::string render_svg(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                              const std::vector<Series>& series, bool logx = false, bool logy = false) {
  const double W = 640, H = 400, L = 70, R = 20, T = 40, Bm = 50;
  auto tx = [&](double v) { return logx ? std::log10(v) : v; };
  auto ty = [&](double v) { return logy ? std::log10(v) : v; };
  auto ok = [&](double x, double y) {
    return std::isfinite(x) && std::isfinite(y) && (!logx || x > 0) && (!logy || y > 0);
  };
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (auto& s : series)
    for (size_t i = 0; i < s.x.size() && i < s.y.size(); ++i)
      if (ok(s.x[i], s.y[i])) {
        x0 = std::min(x0, tx(s.x[i])), x1 = std::max(x1, tx(s.x[i]));
        y0 = std::min(y0, ty(s.y[i])), y1 = std::max(y1, ty(s.y[i]));
      }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x0 -= 0.5, x1 += 0.5;
  if (y1 == y0) y0 -= 0.5, y1 += 0.5;
  auto px = [&](double v) { return L + (tx(v) - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double v) { return H - Bm - (ty(v) - y0) / (y1 - y0) * (H - T - Bm); };
  auto esc = [](const std::string& s) {
    std::string o;
    for (char c : s) o += c == '<' ? "&lt;" : c == '>' ? "&gt;" : c == '&' ? "&amp;" : std::string(1, c);
    return o;
  };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  std::ostringstream o;
  char buf[128];
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << esc(title) << "</text>\n";
  std::snprintf(buf, sizeof buf, "<path d=\"M%.1f %.1f V%.1f H%.1f\" stroke=\"black\" fill=\"none\"/>\n", L, T, H - Bm, W - R);
  o << buf;
  for (int t = 0; t <= 4; ++t) {
    double xv = x0 + (x1 - x0) * t / 4, yv = y0 + (y1 - y0) * t / 4;
    double xs = L + (W - L - R) * t / 4, ys = H - Bm - (H - T - Bm) * t / 4;
    std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"middle\" font-size=\"11\">%.3g</text>\n", xs,
                  H - Bm + 16, logx ? std::pow(10, xv) : xv);
    o << buf;
    std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"end\" font-size=\"11\">%.3g</text>\n", L - 6,
                  ys + 4, logy ? std::pow(10, yv) : yv);
    o << buf;
  }
  o << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\" font-size=\"12\">"
    << esc(xlabel) << (logx ? " (log)" : "") << "</text>\n";
  o << "<text x=\"16\" y=\"" << (T + H - Bm) / 2 << "\" font-size=\"12\" transform=\"rotate(-90 16 " << (T + H - Bm) / 2
    << ")\" text-anchor=\"middle\">" << esc(ylabel) << (logy ? " (log)" : "") << "</text>\n";
  for (size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    std::string pts;
    for (size_t i = 0; i < s.x.size() && i < s.y.size(); ++i)
      if (ok(s.x[i], s.y[i])) {
        std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px(s.x[i]), py(s.y[i]));
        pts += buf;
      }
    const char* c = colors[k % 6];
    o << "<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"1.5\" points=\"" << pts << "\"/>\n";
    o << "<text x=\"" << W - R - 4 << "\" y=\"" << T + 14 * (k + 1) << "\" text-anchor=\"end\" font-size=\"11\" fill=\"" << c
      << "\">" << esc(s.label) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw GuardError("cannot write " + p.string());
  out << text;
}

// SampledMultiplier dump: "# multiplier {d, extents, metadata}", header, then j_1..j_d,re,im rows.
inline std::string multiplier_csv(const SampledMultiplier& S) {
  std::ostringstream o;
  nlohmann::json head = {{"d", S.d()}, {"extents", S.extents}, {"metadata", S.metadata}};
  o << "# multiplier " << head.dump() << "\n";
  for (int i = 0; i < S.d(); ++i) o << "j" << i + 1 << ",";
  o << "re,im\n";
  for (size_t i = 0; i < S.size(); ++i) {
    for (auto j : S.multi_index(i)) o << j << ",";
    o << format_number(S.values[i].real()) << "," << format_number(S.values[i].imag()) << "\n";
  }
  return o.str();
}

inline SampledMultiplier multiplier_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  const std::string tag = "# multiplier ";
  require(line.rfind(tag, 0) == 0, "multiplier CSV: missing header comment");
  auto head = nlohmann::json::parse(line.substr(tag.size()));
  SampledMultiplier S(head.at("extents").get<std::vector<int>>());
  S.metadata = head.value("metadata", nlohmann::json::object());
  std::getline(in, line);
  size_t i = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ls(line);
    std::string x;
    while (std::getline(ls, x, ',')) f.push_back(x);
    require(static_cast<int>(f.size()) == S.d() + 2, "multiplier CSV: bad row");
    std::vector<int64_t> j(S.d());
    for (int k = 0; k < S.d(); ++k) j[k] = std::stoll(f[k]);
    S.values[S.index(j)] = {std::stod(f[S.d()]), std::stod(f[S.d() + 1])};
    ++i;
  }
  require(i == S.size(), "multiplier CSV: expected " + std::to_string(S.size()) + " rows");
  return S;
}

// Binary dump: magic, int64 d, int64 extents[d], int64 metadata length, metadata JSON, re/im doubles.
inline void write_multiplier_binary(const SampledMultiplier& S, const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw GuardError("cannot write " + p.string());
  out.write("RLMULT1\0", 8);
  auto put = [&](int64_t v) { out.write(reinterpret_cast<const char*>(&v), sizeof v); };
  put(S.d());
  for (int e : S.extents) put(e);
  std::string meta = S.metadata.dump();
  put(static_cast<int64_t>(meta.size()));
  out.write(meta.data(), static_cast<std::streamsize>(meta.size()));
  for (auto& v : S.values) {
    double re = v.real(), im = v.imag();
    out.write(reinterpret_cast<const char*>(&re), sizeof re);
    out.write(reinterpret_cast<const char*>(&im), sizeof im);
  }
}

inline SampledMultiplier read_multiplier_binary(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  require(static_cast<bool>(in), "cannot open " + p.string());
  char magic[8];
  in.read(magic, 8);
  require(in && std::string(magic, 7) == "RLMULT1", "multiplier binary: bad magic");
  auto get = [&] {
    int64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    require(static_cast<bool>(in), "multiplier binary: truncated");
    return v;
  };
  int64_t d = get();
  require(d >= 1 && d <= 16, "multiplier binary: bad dimension");
  std::vector<int> ext(d);
  for (auto& e : ext) e = static_cast<int>(get());
  SampledMultiplier S(ext);
  std::string meta(static_cast<size_t>(get()), '\0');
  in.read(meta.data(), static_cast<std::streamsize>(meta.size()));
  S.metadata = nlohmann::json::parse(meta);
  for (auto& v : S.values) {
    double re = 0, im = 0;
    in.read(reinterpret_cast<char*>(&re), sizeof re);
    in.read(reinterpret_cast<char*>(&im), sizeof im);
    v = {re, im};
  }
  require(static_cast<bool>(in), "multiplier binary: truncated");
  return S;
}

}  // namespace radonlab
