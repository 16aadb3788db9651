#include "rotent/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace rotent {

namespace {

[[noreturn]] void parse_error(const std::string& source, int line, int col, const std::string& what) {
  throw Error(ErrorCode::Parse, source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + what);
}

struct Line {
  int number = 0;
  std::string_view text;  // comment stripped
  int offset = 0;         // column of text[0] minus one
};

// Non-blank lines with '#' comments removed and surrounding blanks trimmed.
std::vector<Line> significant_lines(std::string_view text) {
  std::vector<Line> out;
  int number = 0;
  while (!text.empty() || number == 0) {
    ++number;
    auto nl = text.find('\n');
    std::string_view raw = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    int offset = 0;
    while (!raw.empty() && std::isspace(static_cast<unsigned char>(raw.front()))) {
      raw.remove_prefix(1);
      ++offset;
    }
    while (!raw.empty() && std::isspace(static_cast<unsigned char>(raw.back()))) raw.remove_suffix(1);
    if (!raw.empty()) out.push_back({number, raw, offset});
    if (nl == std::string_view::npos) break;
  }
  return out;
}

struct Token {
  std::string_view text;
  int col = 1;
};

std::vector<Token> split_blanks(const Line& line, std::size_t from = 0) {
  std::vector<Token> out;
  std::string_view s = line.text;
  std::size_t i = from;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.push_back({s.substr(i, j - i), line.offset + static_cast<int>(i) + 1});
    i = j;
  }
  return out;
}

struct KeyValue {
  std::string_view key;
  std::string_view value;
  int value_col = 1;
};

std::optional<KeyValue> key_value(const Line& line) {
  auto eq = line.text.find('=');
  if (eq == std::string_view::npos) return std::nullopt;
  KeyValue kv;
  kv.key = line.text.substr(0, eq);
  while (!kv.key.empty() && std::isspace(static_cast<unsigned char>(kv.key.back()))) kv.key.remove_suffix(1);
  std::size_t v = eq + 1;
  while (v < line.text.size() && std::isspace(static_cast<unsigned char>(line.text[v]))) ++v;
  kv.value = line.text.substr(v);
  kv.value_col = line.offset + static_cast<int>(v) + 1;
  return kv;
}

long parse_integer(std::string_view s, const std::string& source, int line, int col) {
  long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) parse_error(source, line, col, "expected an integer");
  return v;
}

double parse_number(std::string_view s, const std::string& source, int line, int col) {
  if (s.find('/') != std::string_view::npos) {
    Rational r;
    try {
      r = Rational::parse(s);
    } catch (const Error&) {
      parse_error(source, line, col, "malformed rational '" + std::string(s) + "'");
    }
    if (r.den == 0) parse_error(source, line, col, "zero denominator");
    return r.value();
  }
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) {
    parse_error(source, line, col, "expected a finite number, got '" + std::string(s) + "'");
  }
  return v;
}

std::string fixed3(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", x);
  return buf;
}

struct Viewport {
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  int size = 800;

  void fit(const std::vector<Eigen::Vector2d>& pts) {
    if (pts.empty()) return;
    x0 = x1 = pts[0](0);
    y0 = y1 = pts[0](1);
    for (const auto& p : pts) {
      x0 = std::min(x0, p(0));
      x1 = std::max(x1, p(0));
      y0 = std::min(y0, p(1));
      y1 = std::max(y1, p(1));
    }
    auto widen = [](double& lo, double& hi) {
      double ext = hi - lo;
      if (!(ext > 0)) {
        lo -= 0.5;
        hi += 0.5;
        ext = 1;
      }
      lo -= 0.05 * ext;
      hi += 0.05 * ext;
    };
    widen(x0, x1);
    widen(y0, y1);
  }
  double X(double x) const { return (x - x0) / (x1 - x0) * size; }
  double Y(double y) const { return size - (y - y0) / (y1 - y0) * size; }
  std::string at(const Eigen::Vector2d& p) const { return fixed3(X(p(0))) + "," + fixed3(Y(p(1))); }
};

std::string svg_open(const Viewport& vp, const SvgOptions& opt) {
  std::string s = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  if (opt.timestamp) s += "<!-- generated " + *opt.timestamp + " -->\n";
  const std::string n = std::to_string(vp.size);
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + n + "\" height=\"" + n + "\" viewBox=\"0 0 " + n +
       " " + n + "\">\n";
  s += "<!-- x in [" + format_double(vp.x0) + ", " + format_double(vp.x1) + "], y in [" + format_double(vp.y0) +
       ", " + format_double(vp.y1) + "] -->\n";
  s += "<rect width=\"" + n + "\" height=\"" + n + "\" fill=\"white\"/>\n";
  return s;
}

}  // namespace

const char* library_version() { return ROTENT_VERSION; }

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path);
  out << text;
  if (!out) throw Error(ErrorCode::InvalidArgument, "write failed for " + path);
}

Sft parse_sft(std::string_view text, const std::string& source) {
  auto lines = significant_lines(text);
  std::optional<int> d;
  Rational theta{1, 2};
  std::optional<Eigen::MatrixXi> A;
  std::size_t i = 0;
  while (i < lines.size()) {
    const Line& line = lines[i];
    auto kv = key_value(line);
    if (!kv) parse_error(source, line.number, line.offset + 1, "expected 'key = value'");
    if (kv->key == "d") {
      long v = parse_integer(kv->value, source, line.number, kv->value_col);
      if (v < 1 || v > 1 << 20) parse_error(source, line.number, kv->value_col, "d out of range");
      d = static_cast<int>(v);
      ++i;
    } else if (kv->key == "theta") {
      try {
        theta = Rational::parse(kv->value);
      } catch (const Error&) {
        parse_error(source, line.number, kv->value_col, "theta must be a rational p/q");
      }
      ++i;
    } else if (kv->key == "A") {
      if (!d) parse_error(source, line.number, line.offset + 1, "'d' must precede 'A'");
      if (!kv->value.empty()) parse_error(source, line.number, kv->value_col, "matrix rows start on the next line");
      Eigen::MatrixXi M(*d, *d);
      for (int r = 0; r < *d; ++r) {
        if (++i >= lines.size()) parse_error(source, line.number, 1, "expected " + std::to_string(*d) + " matrix rows");
        const Line& row = lines[i];
        std::vector<std::pair<char, int>> digits;
        for (std::size_t c = 0; c < row.text.size(); ++c) {
          char ch = row.text[c];
          if (std::isspace(static_cast<unsigned char>(ch))) continue;
          int col = row.offset + static_cast<int>(c) + 1;
          if (ch != '0' && ch != '1') parse_error(source, row.number, col, "matrix entries must be 0 or 1");
          digits.push_back({ch, col});
        }
        if (static_cast<int>(digits.size()) != *d) {
          parse_error(source, row.number, row.offset + 1,
                      "row has " + std::to_string(digits.size()) + " entries, expected " + std::to_string(*d));
        }
        for (int c = 0; c < *d; ++c) M(r, c) = digits[c].first - '0';
      }
      A = M;
      ++i;
    } else {
      parse_error(source, line.number, line.offset + 1, "unknown key '" + std::string(kv->key) + "'");
    }
  }
  if (!d) parse_error(source, 1, 1, "missing 'd'");
  if (!A) parse_error(source, 1, 1, "missing 'A'");
  return build_sft(*d, *A, theta);
}

std::string format_sft(const Sft& s) {
  std::string out = "d = " + std::to_string(s.d()) + "\ntheta = " + s.theta().str() + "\nA =\n";
  Eigen::MatrixXi A = s.dense();
  for (int r = 0; r < s.d(); ++r) {
    for (int c = 0; c < s.d(); ++c) {
      if (c) out += ' ';
      out += static_cast<char>('0' + A(r, c));
    }
    out += '\n';
  }
  return out;
}

LcPotential parse_potential(std::string_view text, SftPtr sft, const std::string& source, const Limits& limits) {
  auto lines = significant_lines(text);
  std::optional<int> k, m;
  std::map<Word, Eigen::VectorXd> table;
  const int d = sft->d();
  for (const Line& line : lines) {
    auto colon = line.text.find(':');
    if (colon == std::string_view::npos) {
      auto kv = key_value(line);
      if (!kv) parse_error(source, line.number, line.offset + 1, "expected 'key = value' or 'word: values'");
      long v = parse_integer(kv->value, source, line.number, kv->value_col);
      if (v < 1 || v > 64) parse_error(source, line.number, kv->value_col, "value out of range");
      if (kv->key == "k") {
        k = static_cast<int>(v);
      } else if (kv->key == "m") {
        m = static_cast<int>(v);
      } else {
        parse_error(source, line.number, line.offset + 1, "unknown key '" + std::string(kv->key) + "'");
      }
      continue;
    }
    if (!k || !m) parse_error(source, line.number, line.offset + 1, "'k' and 'm' must precede the table");
    std::string_view wtext = line.text.substr(0, colon);
    while (!wtext.empty() && std::isspace(static_cast<unsigned char>(wtext.back()))) wtext.remove_suffix(1);
    Word w;
    const bool dotted = wtext.find('.') != std::string_view::npos || d > 10;
    std::size_t pos = 0;
    while (pos < wtext.size()) {
      std::size_t end = dotted ? std::min(wtext.find('.', pos), wtext.size()) : pos + 1;
      const int col = line.offset + static_cast<int>(pos) + 1;
      long sym = parse_integer(wtext.substr(pos, end - pos), source, line.number, col);
      if (sym < 0 || sym >= d) parse_error(source, line.number, col, "symbol out of range");
      w.push_back(static_cast<Symbol>(sym));
      pos = dotted ? end + 1 : end;
    }
    if (static_cast<int>(w.size()) != *k) {
      parse_error(source, line.number, line.offset + 1, "word length " + std::to_string(w.size()) + ", expected k = " +
                                                            std::to_string(*k));
    }
    if (!sft->admissible(w)) parse_error(source, line.number, line.offset + 1, "word is not admissible");
    auto values = split_blanks(line, colon + 1);
    if (static_cast<int>(values.size()) != *m) {
      parse_error(source, line.number, line.offset + static_cast<int>(colon) + 2,
                  "expected " + std::to_string(*m) + " values");
    }
    Eigen::VectorXd v(*m);
    for (int c = 0; c < *m; ++c) v(c) = parse_number(values[c].text, source, line.number, values[c].col);
    if (!table.emplace(w, v).second) parse_error(source, line.number, line.offset + 1, "duplicate word");
  }
  if (!k || !m) parse_error(source, 1, 1, "missing 'k' or 'm'");
  return lc_from_table(std::move(sft), *k, *m, table, limits);
}

std::string format_potential(const LcPotential& phi) {
  std::string out = "k = " + std::to_string(phi.k()) + "\nm = " + std::to_string(phi.m()) + "\n";
  const int d = phi.sft()->d();
  for (std::size_t i = 0; i < phi.size(); ++i) {
    out += format_word(phi.words()[i], d);
    out += ":";
    for (int c = 0; c < phi.m(); ++c) out += " " + format_double(phi.values()(static_cast<Eigen::Index>(i), c));
    out += '\n';
  }
  return out;
}

Eigen::MatrixXd parse_matrix(std::string_view text, const std::string& source) {
  auto lines = significant_lines(text);
  if (lines.empty()) parse_error(source, 1, 1, "empty matrix");
  std::vector<std::vector<double>> rows;
  for (const Line& line : lines) {
    auto tokens = split_blanks(line);
    std::vector<double> row;
    for (const auto& t : tokens) row.push_back(parse_number(t.text, source, line.number, t.col));
    if (!rows.empty() && row.size() != rows[0].size()) {
      parse_error(source, line.number, line.offset + 1, "row length differs from the first row");
    }
    rows.push_back(std::move(row));
  }
  Eigen::MatrixXd M(rows.size(), rows[0].size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) M(r, c) = rows[r][c];
  }
  return M;
}

std::string format_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

Json to_json(const Eigen::MatrixXd& points) {
  Json a = Json::array();
  for (Eigen::Index j = 0; j < points.cols(); ++j) {
    Json p = Json::array();
    for (Eigen::Index i = 0; i < points.rows(); ++i) p.push_back(points(i, j));
    a.push_back(std::move(p));
  }
  return a;
}

Json to_json(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Json to_json(const Interval& i) { return Json{{"lo", i.lo}, {"hi", i.hi}}; }

Json to_json(const PerronData<double>& pd) {
  return Json{{"lambda_lo", pd.lambda_lo}, {"lambda_hi", pd.lambda_hi}, {"residual", pd.residual},
              {"iterations", pd.iterations}, {"r", to_json(pd.r)},        {"l", to_json(pd.l)}};
}

Json to_json(const RotationPolytope& poly) {
  return Json{{"m", poly.m()},
              {"vertices", to_json(Eigen::MatrixXd(poly.vertices()))},
              {"hausdorff_error", poly.hausdorff_error},
              {"affine_dim", poly.affine_dim()}};
}

Json to_json(const LevelRecord& r) {
  auto num = [](double x) { return std::isfinite(x) ? Json(x) : Json(x > 0 ? "inf" : "-inf"); };
  return Json{{"n", r.n},
              {"eps", r.eps},
              {"radius", r.radius},
              {"v_radius", r.v_radius},
              {"raw_l", num(r.raw_l)},
              {"raw_u", num(r.raw_u)},
              {"l", num(r.l)},
              {"u", num(r.u)},
              {"slack_grid", r.slack_grid},
              {"slack_numeric", r.slack_numeric},
              {"slack_potential", r.slack_potential},
              {"cells", r.cells},
              {"evaluations", r.evaluations},
              {"interior_certified", r.interior_certified}};
}

Json to_json(const EntropyEnclosure& enc) {
  Json levels = Json::array();
  for (const auto& r : enc.trace) levels.push_back(to_json(r));
  return Json{{"w", to_json(enc.w)}, {"l", enc.l},           {"u", enc.u}, {"tol", enc.tol},
              {"r_min", enc.r_min},  {"converged", enc.converged}, {"levels", std::move(levels)}};
}

Json to_json(const ExposedRecord& rec) { return Json{{"n", rec.n}, {"K", rec.K}, {"margin", rec.margin}}; }

Json to_json(const LowerCertificate& c) {
  return Json{{"n", c.n},
              {"K", c.K},
              {"eps", c.eps},
              {"branch", c.branch},
              {"w_star", to_json(Eigen::VectorXd(c.w_star))},
              {"extreme_margin", c.extreme_margin},
              {"preimage_words", c.preimage_words},
              {"invariant_states", c.invariant_states},
              {"cycles", c.cycles},
              {"table_checked", c.table_checked},
              {"h_l", c.h_l}};
}

Json to_json(const UpperWitness& w) {
  Json j{{"n", w.n},
         {"K", w.K},
         {"eps", w.eps},
         {"rv", to_json(Eigen::VectorXd(w.rv))},
         {"entropy", w.entropy},
         {"table_checked", w.table_checked}};
  Json sweep{{"certifying", false}, {"samples", w.sweep_samples}};
  sweep["max_entropy"] = w.sweep_max_entropy ? Json(*w.sweep_max_entropy) : Json(nullptr);
  j["sanity_sweep"] = std::move(sweep);
  return j;
}

Json envelope(const std::string& command, Json config, Json result) {
  return Json{{"schema_version", kSchemaVersion},
              {"command", command},
              {"version", library_version()},
              {"config", std::move(config)},
              {"result", std::move(result)}};
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

std::string polygon_svg(const Eigen::Matrix2Xd& hull, const Eigen::Matrix2Xd& points,
                        const std::vector<Eigen::Vector2d>& marks, const SvgOptions& opt) {
  std::vector<Eigen::Vector2d> all;
  for (Eigen::Index j = 0; j < hull.cols(); ++j) all.push_back(hull.col(j));
  for (Eigen::Index j = 0; j < points.cols(); ++j) all.push_back(points.col(j));
  for (const auto& p : marks) all.push_back(p);
  Viewport vp;
  vp.size = opt.size;
  vp.fit(all);
  std::string s = svg_open(vp, opt);
  if (hull.cols() >= 2) {
    s += "<polygon points=\"";
    for (Eigen::Index j = 0; j < hull.cols(); ++j) s += (j ? " " : "") + vp.at(hull.col(j));
    s += "\" fill=\"#cfd8e3\" stroke=\"#33475b\" stroke-width=\"1.5\"/>\n";
  }
  for (Eigen::Index j = 0; j < hull.cols(); ++j) {
    s += "<circle cx=\"" + fixed3(vp.X(hull(0, j))) + "\" cy=\"" + fixed3(vp.Y(hull(1, j))) +
         "\" r=\"3\" fill=\"#33475b\"/>\n";
  }
  for (Eigen::Index j = 0; j < points.cols(); ++j) {
    s += "<circle cx=\"" + fixed3(vp.X(points(0, j))) + "\" cy=\"" + fixed3(vp.Y(points(1, j))) +
         "\" r=\"2\" fill=\"#e07b39\"/>\n";
  }
  for (const auto& p : marks) {
    s += "<circle cx=\"" + fixed3(vp.X(p(0))) + "\" cy=\"" + fixed3(vp.Y(p(1))) +
         "\" r=\"6\" fill=\"none\" stroke=\"#c0392b\" stroke-width=\"2\"/>\n";
  }
  s += "</svg>\n";
  return s;
}

std::string spectrum_csv(const std::vector<SpectrumRow>& rows) {
  std::string s;
  const Eigen::Index m = rows.empty() ? 1 : rows[0].w.size();
  for (Eigen::Index i = 0; i < m; ++i) s += "w" + std::to_string(i + 1) + ",";
  s += "l,u,ok\n";
  for (const auto& r : rows) {
    for (Eigen::Index i = 0; i < r.w.size(); ++i) s += format_double(r.w(i)) + ",";
    s += (r.ok ? format_double(r.l) : "") + "," + (r.ok ? format_double(r.u) : "") + "," + (r.ok ? "1" : "0") + "\n";
  }
  return s;
}

std::string spectrum_svg(const std::vector<SpectrumRow>& rows, const SvgOptions& opt) {
  const Eigen::Index m = rows.empty() ? 1 : rows[0].w.size();
  if (m > 2) throw Error(ErrorCode::InvalidArgument, "spectrum plots need m <= 2");
  std::vector<const SpectrumRow*> good;
  for (const auto& r : rows) {
    if (r.ok) good.push_back(&r);
  }
  Viewport vp;
  vp.size = opt.size;
  std::string s;
  if (m == 1) {
    std::vector<Eigen::Vector2d> all;
    for (auto* r : good) {
      all.push_back({r->w(0), r->l});
      all.push_back({r->w(0), r->u});
    }
    vp.fit(all);
    s = svg_open(vp, opt);
    std::sort(good.begin(), good.end(), [](auto* a, auto* b) { return a->w(0) < b->w(0); });
    for (int pass = 0; pass < 2; ++pass) {
      s += "<polyline fill=\"none\" stroke=\"" + std::string(pass ? "#c0392b" : "#33475b") +
           "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t i = 0; i < good.size(); ++i) {
        s += (i ? " " : "") + vp.at({good[i]->w(0), pass ? good[i]->u : good[i]->l});
      }
      s += "\"/>\n";
    }
  } else {
    std::vector<Eigen::Vector2d> all;
    std::set<double> xs, ys;
    for (const auto& r : rows) {
      all.push_back(r.w);
      xs.insert(r.w(0));
      ys.insert(r.w(1));
    }
    auto spacing = [](const std::set<double>& v) {
      double h = std::numeric_limits<double>::infinity();
      for (auto it = v.begin(); std::next(it) != v.end() && it != v.end(); ++it) h = std::min(h, *std::next(it) - *it);
      return std::isfinite(h) ? h : 1.0;
    };
    const double hx = spacing(xs), hy = spacing(ys);
    vp.fit(all);
    s = svg_open(vp, opt);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (auto* r : good) {
      lo = std::min(lo, (r->l + r->u) / 2);
      hi = std::max(hi, (r->l + r->u) / 2);
    }
    for (auto* r : good) {
      const double t = hi > lo ? ((r->l + r->u) / 2 - lo) / (hi - lo) : 1.0;
      const int red = static_cast<int>(std::lround(247 - t * (247 - 8)));
      const int green = static_cast<int>(std::lround(251 - t * (251 - 48)));
      const int blue = static_cast<int>(std::lround(255 - t * (255 - 107)));
      char color[16];
      std::snprintf(color, sizeof color, "#%02x%02x%02x", red, green, blue);
      const double x = vp.X(r->w(0) - hx / 2), y = vp.Y(r->w(1) + hy / 2);
      const double wd = vp.X(r->w(0) + hx / 2) - x, ht = vp.Y(r->w(1) - hy / 2) - y;
      s += "<rect x=\"" + fixed3(x) + "\" y=\"" + fixed3(y) + "\" width=\"" + fixed3(wd) + "\" height=\"" +
           fixed3(ht) + "\" fill=\"" + color + "\"/>\n";
    }
  }
  s += "</svg>\n";
  return s;
}

}  // namespace rotent
