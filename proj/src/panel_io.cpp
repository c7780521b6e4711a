#include "panel_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "rng.hpp"

namespace probitar {

namespace {

[[noreturn]] void fail(const std::string& msg) {
  throw std::invalid_argument(msg);
}

std::string key_of(const RawRecord& r) {
  return r.path_id + "\x1f" + std::to_string(r.time) + "\x1f" + r.series;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_number(const std::string& s, const std::string& context) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    fail(context + ": not a number: '" + s + "'");
  }
  if (pos != s.size()) fail(context + ": trailing characters in '" + s + "'");
  if (!std::isfinite(v)) fail(context + ": non-finite value");
  return v;
}

std::int64_t parse_time(const std::string& s, const std::string& context) {
  std::size_t pos = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &pos);
  } catch (const std::exception&) {
    fail(context + ": not an integer time: '" + s + "'");
  }
  if (pos != s.size()) fail(context + ": trailing characters in '" + s + "'");
  return v;
}

// Type-7 quantile (linear interpolation between order statistics).
double quantile_type7(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double h = q * (static_cast<double>(v.size()) - 1.0);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= v.size()) return v.back();
  return v[lo] + (h - lo) * (v[lo + 1] - v[lo]);
}

std::string format_value(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void write_u32(std::ofstream& os, std::uint32_t v) {
  unsigned char buf[4];
  for (int i = 0; i < 4; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(buf), 4);
}

std::uint32_t read_u32(std::ifstream& is) {
  unsigned char buf[4];
  is.read(reinterpret_cast<char*>(buf), 4);
  if (!is) fail("trace: truncated header");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(buf[i]) << (8 * i);
  return v;
}

}  // namespace

void RawPanel::sort_canonical() {
  std::sort(records.begin(), records.end(),
            [](const RawRecord& a, const RawRecord& b) {
              if (a.path_id != b.path_id) return a.path_id < b.path_id;
              if (a.time != b.time) return a.time < b.time;
              return a.series < b.series;
            });
}

std::vector<std::string> RawPanel::series_names() const {
  std::set<std::string> s;
  for (const auto& r : records) s.insert(r.series);
  return {s.begin(), s.end()};
}

std::vector<std::string> RawPanel::path_ids() const {
  std::set<std::string> s;
  for (const auto& r : records) s.insert(r.path_id);
  return {s.begin(), s.end()};
}

RawPanel load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("load_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) fail("load_csv: empty file " + path);
  {
    const auto header = split_fields(line);
    if (header != std::vector<std::string>{"path_id", "time", "series", "value"})
      fail("load_csv: expected header path_id,time,series,value");
  }
  RawPanel panel;
  std::set<std::string> keys;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    const std::string context = "load_csv row " + std::to_string(row);
    if (fields.size() != 4) fail(context + ": expected 4 fields");
    RawRecord rec;
    rec.path_id = fields[0];
    rec.time = parse_time(fields[1], context);
    rec.series = fields[2];
    if (!fields[3].empty()) rec.value = parse_number(fields[3], context);
    if (!keys.insert(key_of(rec)).second)
      fail(context + ": duplicate key (" + rec.path_id + "," +
           std::to_string(rec.time) + "," + rec.series + ")");
    panel.records.push_back(std::move(rec));
  }
  return panel;
}

void save_csv(const RawPanel& panel, const std::string& path) {
  RawPanel sorted = panel;
  sorted.sort_canonical();
  std::ofstream out(path);
  if (!out) fail("save_csv: cannot open " + path);
  out << "path_id,time,series,value\n";
  for (const auto& r : sorted.records) {
    out << r.path_id << ',' << r.time << ',' << r.series << ',';
    if (r.value) out << format_value(*r.value);
    out << '\n';
  }
  if (!out) fail("save_csv: write failed for " + path);
}

RawPanel binarize(const RawPanel& panel, const BinarizeSpec& spec) {
  std::unordered_map<std::string, std::vector<double>> pooled;
  for (const auto& r : panel.records)
    if (r.value) pooled[r.series].push_back(*r.value);

  std::unordered_map<std::string, double> thresholds;
  for (const auto& name : panel.series_names()) {
    const auto it = pooled.find(name);
    if (it == pooled.end())
      fail("binarize: series '" + name + "' has no observed values");
    if (it->second.size() < 3)
      fail("binarize: series '" + name + "' has fewer than 3 observed values");
    double q = spec.quantile;
    if (const auto ov = spec.per_series.find(name); ov != spec.per_series.end())
      q = ov->second;
    if (!(q > 0.0 && q < 1.0)) fail("binarize: quantile must be in (0,1)");
    thresholds[name] = quantile_type7(it->second, q);
  }

  RawPanel out = panel;
  for (auto& r : out.records)
    if (r.value) r.value = (*r.value <= thresholds[r.series]) ? 0.0 : 1.0;
  return out;
}

ImputeResult impute(const RawPanel& panel, std::uint64_t seed) {
  std::unordered_map<std::string, std::pair<long, long>> counts;  // ones, total
  for (const auto& r : panel.records) {
    if (!r.value) continue;
    if (*r.value != 0.0 && *r.value != 1.0)
      fail("impute: panel is not binary (series '" + r.series + "')");
    auto& c = counts[r.series];
    c.first += (*r.value == 1.0);
    ++c.second;
  }

  ImputeResult res;
  res.panel = panel;
  res.panel.sort_canonical();

  // One derived stream per series (sorted order), cells visited canonically.
  const auto names = panel.series_names();
  std::unordered_map<std::string, Rng> streams;
  std::unordered_map<std::string, double> p_one;
  for (std::size_t s = 0; s < names.size(); ++s) {
    const auto it = counts.find(names[s]);
    if (it == counts.end() || it->second.second == 0)
      fail("impute: series '" + names[s] + "' has no observed values");
    p_one[names[s]] =
        static_cast<double>(it->second.first) / it->second.second;
    streams.emplace(names[s], Rng::derive(seed, s, 101));
  }

  for (auto& r : res.panel.records) {
    if (r.value) continue;
    auto& rng = streams.at(r.series);
    const double draw = rng.uniform();
    r.value = (draw < p_one[r.series]) ? 1.0 : 0.0;
    RawRecord mark = r;
    mark.value = 1.0;
    res.mask.records.push_back(std::move(mark));
  }
  return res;
}

AssembleResult assemble(const RawPanel& panel,
                        const std::vector<std::string>& responses,
                        const std::vector<std::string>& covariates) {
  if (responses.empty()) fail("assemble: need at least one response series");
  const auto known = panel.series_names();
  const std::set<std::string> known_set(known.begin(), known.end());
  for (const auto& name : responses)
    if (!known_set.count(name)) fail("assemble: unknown series '" + name + "'");
  for (const auto& name : covariates)
    if (!known_set.count(name)) fail("assemble: unknown series '" + name + "'");

  std::set<std::string> wanted(responses.begin(), responses.end());
  for (const auto& name : covariates) {
    if (wanted.count(name))
      fail("assemble: series '" + name + "' listed as both response and covariate");
    wanted.insert(name);
  }

  // cell[path][time][series] -> value
  struct Cell {
    std::map<std::string, double> by_series;
  };
  std::map<std::string, std::map<std::int64_t, Cell>> grid;
  for (const auto& r : panel.records) {
    if (!wanted.count(r.series)) continue;
    if (!r.value) fail("assemble: missing value in series '" + r.series +
                       "' (impute first)");
    grid[r.path_id][r.time].by_series[r.series] = *r.value;
  }
  if (grid.empty()) fail("assemble: no records for the selected series");

  // Common contiguous window across paths.
  std::int64_t t_lo = std::numeric_limits<std::int64_t>::min();
  std::int64_t t_hi = std::numeric_limits<std::int64_t>::max();
  bool truncated = false;
  for (const auto& [pid, times] : grid) {
    const std::int64_t lo = times.begin()->first;
    const std::int64_t hi = times.rbegin()->first;
    if (static_cast<std::int64_t>(times.size()) != hi - lo + 1)
      fail("assemble: path '" + pid + "' has non-contiguous times");
    if (t_lo != std::numeric_limits<std::int64_t>::min() &&
        (lo != t_lo || hi != t_hi))
      truncated = true;
    t_lo = std::max(t_lo, lo);
    t_hi = std::min(t_hi, hi);
  }
  if (t_lo > t_hi) fail("assemble: paths have no common time window");

  AssembleResult res;
  res.truncated = truncated;
  const int T = static_cast<int>(t_hi - t_lo + 1);
  const int k = static_cast<int>(responses.size());
  const int d = static_cast<int>(covariates.size());
  for (const auto& [pid, times] : grid) {
    PathData path;
    path.Y.resize(T, k);
    path.X.resize(T, d);
    for (int t = 0; t < T; ++t) {
      const auto cell = times.find(t_lo + t);
      if (cell == times.end()) fail("assemble: internal window error");
      for (int i = 0; i < k; ++i) {
        const auto v = cell->second.by_series.find(responses[i]);
        if (v == cell->second.by_series.end())
          fail("assemble: path '" + pid + "' time " +
               std::to_string(t_lo + t) + " lacks series '" + responses[i] + "'");
        if (v->second != 0.0 && v->second != 1.0)
          fail("assemble: response series '" + responses[i] + "' is not binary");
        path.Y(t, i) = static_cast<std::uint8_t>(v->second);
      }
      for (int m = 0; m < d; ++m) {
        const auto v = cell->second.by_series.find(covariates[m]);
        if (v == cell->second.by_series.end())
          fail("assemble: path '" + pid + "' time " +
               std::to_string(t_lo + t) + " lacks series '" + covariates[m] + "'");
        path.X(t, m) = v->second;
      }
    }
    res.panel.paths.push_back(std::move(path));
    res.path_ids.push_back(pid);
  }
  res.panel.validate();
  return res;
}

void save_panel_csv(const PanelData& panel, const std::string& path) {
  panel.validate();
  RawPanel raw;
  raw.records.reserve(static_cast<std::size_t>(panel.n()) * panel.horizon() *
                      (panel.k() + panel.d()));
  for (int j = 0; j < panel.n(); ++j) {
    const auto& p = panel.paths[j];
    for (int t = 0; t < panel.horizon(); ++t) {
      for (int i = 0; i < panel.k(); ++i) {
        RawRecord r;
        r.path_id = std::to_string(j);
        r.time = t;
        r.series = "y" + std::to_string(i + 1);
        r.value = static_cast<double>(p.Y(t, i));
        raw.records.push_back(std::move(r));
      }
      for (int m = 0; m < panel.d(); ++m) {
        RawRecord r;
        r.path_id = std::to_string(j);
        r.time = t;
        r.series = "x" + std::to_string(m + 1);
        r.value = p.X(t, m);
        raw.records.push_back(std::move(r));
      }
    }
  }
  save_csv(raw, path);
}

PanelData load_panel_csv(const std::string& path) {
  const RawPanel raw = load_csv(path);
  std::vector<std::string> ys, xs;
  for (const auto& name : raw.series_names()) {
    const bool digits =
        name.size() > 1 &&
        std::all_of(name.begin() + 1, name.end(),
                    [](unsigned char c) { return std::isdigit(c); });
    if (digits && name[0] == 'y')
      ys.push_back(name);
    else if (digits && name[0] == 'x')
      xs.push_back(name);
    else
      fail("load_panel_csv: series '" + name +
           "' does not follow the y<i>/x<m> convention");
  }
  const auto by_index = [](const std::string& a, const std::string& b) {
    return std::stoi(a.substr(1)) < std::stoi(b.substr(1));
  };
  std::sort(ys.begin(), ys.end(), by_index);
  std::sort(xs.begin(), xs.end(), by_index);
  if (ys.empty()) fail("load_panel_csv: no response series found");
  return assemble(raw, ys, xs).panel;
}

void save_trace(const PanelData& panel, int lag_order, const std::string& path) {
  panel.validate();
  if (lag_order < 0) fail("save_trace: lag order must be >= 0");
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("save_trace: cannot open " + path);
  out.write("PAR1", 4);
  write_u32(out, static_cast<std::uint32_t>(panel.k()));
  write_u32(out, static_cast<std::uint32_t>(panel.d()));
  write_u32(out, static_cast<std::uint32_t>(lag_order));
  write_u32(out, static_cast<std::uint32_t>(panel.horizon()));
  write_u32(out, static_cast<std::uint32_t>(panel.n()));
  for (const auto& p : panel.paths) {
    for (int t = 0; t < panel.horizon(); ++t)
      for (int i = 0; i < panel.k(); ++i) {
        const char b = static_cast<char>(p.Y(t, i));
        out.write(&b, 1);
      }
    for (int t = 0; t < panel.horizon(); ++t)
      for (int m = 0; m < panel.d(); ++m) {
        const double v = p.X(t, m);
        std::uint64_t bits;
        std::memcpy(&bits, &v, 8);
        unsigned char buf[8];
        for (int byte = 0; byte < 8; ++byte)
          buf[byte] = static_cast<unsigned char>(bits >> (8 * byte));
        out.write(reinterpret_cast<const char*>(buf), 8);
      }
  }
  if (!out) fail("save_trace: write failed for " + path);
}

PanelData load_trace(const std::string& path, int* lag_order) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("load_trace: cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "PAR1", 4) != 0)
    fail("load_trace: bad magic (expected PAR1)");
  const auto k = static_cast<int>(read_u32(in));
  const auto d = static_cast<int>(read_u32(in));
  const auto p = static_cast<int>(read_u32(in));
  const auto T = static_cast<int>(read_u32(in));
  const auto n = static_cast<int>(read_u32(in));
  if (k < 1 || d < 0 || T < 1 || n < 1) fail("load_trace: bad dimensions");
  if (lag_order) *lag_order = p;
  PanelData panel;
  panel.paths.resize(n);
  for (auto& pathdata : panel.paths) {
    pathdata.Y.resize(T, k);
    pathdata.X.resize(T, d);
    for (int t = 0; t < T; ++t)
      for (int i = 0; i < k; ++i) {
        char b;
        in.read(&b, 1);
        pathdata.Y(t, i) = static_cast<std::uint8_t>(b);
      }
    for (int t = 0; t < T; ++t)
      for (int m = 0; m < d; ++m) {
        unsigned char buf[8];
        in.read(reinterpret_cast<char*>(buf), 8);
        std::uint64_t bits = 0;
        for (int byte = 0; byte < 8; ++byte)
          bits |= static_cast<std::uint64_t>(buf[byte]) << (8 * byte);
        double v;
        std::memcpy(&v, &bits, 8);
        pathdata.X(t, m) = v;
      }
    if (!in) fail("load_trace: truncated file");
  }
  panel.validate();
  return panel;
}

}  // namespace probitar
