#include "oracles.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <unistd.h>

#include "json.hpp"

namespace testsupport {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

size_t pow2_at_least(size_t n) {
  size_t p = 1;
  while (p < n) p *= 2;
  return p;
}

}  // namespace

std::vector<onebm::RelationalTuple> oracle_collect(const onebm::Database& db,
                                                   const onebm::JoiningPath& path) {
  using onebm::CellValue;
  using onebm::ColumnRole;
  using onebm::ColumnType;

  std::vector<int> tables = db.path_tables(path);
  size_t hops = path.hops.size();

  // Per-entity cutoff from the main table's cutoff column (role first, then
  // a timestamp column literally named "cutoff_time").
  const onebm::LoadedTable& main = db.main();
  int cutoff_col = -1;
  for (size_t c = 0; c < main.spec.columns.size(); ++c)
    if (main.spec.columns[c].has_role(ColumnRole::cutoff_time)) {
      cutoff_col = int(c);
      break;
    }
  if (cutoff_col < 0)
    for (size_t c = 0; c < main.spec.columns.size(); ++c)
      if (main.spec.columns[c].name == "cutoff_time" &&
          main.columns[c].type == ColumnType::timestamp) {
        cutoff_col = int(c);
        break;
      }

  // Deepest table on the path carrying an event_time column.
  int event_pos = -1, event_col = -1;
  for (size_t p = 0; p < tables.size(); ++p) {
    const onebm::LoadedTable& t = db.table(tables[p]);
    for (size_t c = 0; c < t.spec.columns.size(); ++c)
      if (t.spec.columns[c].has_role(ColumnRole::event_time)) {
        event_pos = int(p);
        event_col = int(c);
        break;
      }
  }

  std::vector<onebm::RelationalTuple> out;
  std::vector<uint32_t> chain(tables.size());

  auto descend = [&](auto&& self, size_t pos) -> void {
    if (pos == hops) {
      const onebm::LoadedTable& leaf = db.table(tables[pos]);
      onebm::RelationalTuple t;
      t.entity_row = chain[0];
      for (size_t i = 1; i < hops; ++i) t.group_ids.push_back(chain[i]);
      t.value = leaf.columns[path.collected_column].cell(chain[pos]);
      if (event_pos >= 0) {
        const onebm::ColumnData& ec = db.table(tables[event_pos]).columns[event_col];
        if (!ec.nulls[chain[event_pos]]) t.event_time = ec.timestamps[chain[event_pos]];
      }
      if (t.event_time && cutoff_col >= 0 && !main.columns[cutoff_col].nulls[t.entity_row]) {
        int64_t cut = main.columns[cutoff_col].timestamps[t.entity_row];
        if (!(*t.event_time < cut)) return;
      }
      out.push_back(std::move(t));
      return;
    }
    const onebm::PathHop& hop = path.hops[pos];
    int src_col = db.hop_source_column(hop);
    int dst_col = db.hop_dest_column(hop);
    const onebm::ColumnData& src = db.table(tables[pos]).columns[src_col];
    const onebm::LoadedTable& dst = db.table(tables[pos + 1]);
    if (src.nulls[chain[pos]]) return;
    CellValue key = src.cell(chain[pos]);
    for (uint32_t r = 0; r < dst.row_count; ++r) {
      if (dst.columns[dst_col].nulls[r]) continue;
      if (dst.columns[dst_col].cell(r) == key) {
        chain[pos + 1] = r;
        self(self, pos + 1);
      }
    }
  };

  for (uint32_t e = 0; e < main.row_count; ++e) {
    chain[0] = e;
    descend(descend, 0);
  }
  return out;
}

bool same_tuples(const std::vector<onebm::RelationalTuple>& a,
                 const std::vector<onebm::RelationalTuple>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i].entity_row != b[i].entity_row) return false;
    if (a[i].group_ids != b[i].group_ids) return false;
    if (!(a[i].value == b[i].value)) return false;
    if (a[i].event_time != b[i].event_time) return false;
  }
  return true;
}

std::vector<double> oracle_dft(const std::vector<double>& x, size_t coeffs) {
  std::vector<double> out(coeffs, kNaN);
  if (x.empty()) return out;
  size_t n = pow2_at_least(x.size());
  for (size_t k = 0; k < coeffs && k < n; ++k) {
    std::complex<double> acc(0.0, 0.0);
    for (size_t t = 0; t < x.size(); ++t) {
      double angle = -2.0 * M_PI * double(k) * double(t) / double(n);
      acc += x[t] * std::complex<double>(std::cos(angle), std::sin(angle));
    }
    out[k] = std::abs(acc);
  }
  return out;
}

namespace {

std::vector<double> haar_cascade(std::vector<double> v) {
  if (v.size() <= 1) return v;
  std::vector<double> approx, detail;
  for (size_t i = 0; i + 1 < v.size(); i += 2) {
    approx.push_back((v[i] + v[i + 1]) / std::sqrt(2.0));
    detail.push_back((v[i] - v[i + 1]) / std::sqrt(2.0));
  }
  std::vector<double> head = haar_cascade(std::move(approx));
  head.insert(head.end(), detail.begin(), detail.end());
  return head;
}

}  // namespace

std::vector<double> oracle_haar(const std::vector<double>& x, size_t coeffs) {
  std::vector<double> out(coeffs, kNaN);
  if (x.empty()) return out;
  std::vector<double> padded = x;
  padded.resize(pow2_at_least(x.size()), 0.0);
  std::vector<double> all = haar_cascade(std::move(padded));
  for (size_t i = 0; i < coeffs && i < all.size(); ++i) out[i] = all[i];
  return out;
}

double oracle_autocorr(const std::vector<double>& x, size_t lag) {
  size_t n = x.size();
  if (n <= lag) return kNaN;
  double mean = 0;
  for (double v : x) mean += v;
  mean /= double(n);
  double var = 0;
  for (double v : x) var += (v - mean) * (v - mean);
  var /= double(n);
  if (var == 0) return kNaN;
  double num = 0;
  for (size_t t = 0; t + lag < n; ++t) num += (x[t] - mean) * (x[t + lag] - mean);
  num /= double(n - lag);
  return num / var;
}

double oracle_ks(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.empty() || b.empty()) return 0.0;
  std::vector<double> points = a;
  points.insert(points.end(), b.begin(), b.end());
  double best = 0.0;
  for (double t : points) {
    double fa = 0, fb = 0;
    for (double v : a) fa += v <= t;
    for (double v : b) fb += v <= t;
    best = std::max(best, std::fabs(fa / double(a.size()) - fb / double(b.size())));
  }
  return best;
}

double oracle_chi_square_stat(const std::vector<std::vector<double>>& table) {
  size_t rows = table.size();
  size_t cols = rows ? table[0].size() : 0;
  std::vector<double> rs(rows, 0), cs(cols, 0);
  double total = 0;
  for (size_t r = 0; r < rows; ++r)
    for (size_t c = 0; c < cols; ++c) {
      rs[r] += table[r][c];
      cs[c] += table[r][c];
      total += table[r][c];
    }
  double stat = 0;
  for (size_t r = 0; r < rows; ++r)
    for (size_t c = 0; c < cols; ++c) {
      double expected = rs[r] * cs[c] / total;
      if (expected > 0) {
        double diff = table[r][c] - expected;
        stat += diff * diff / expected;
      }
    }
  return stat;
}

double oracle_mean(const std::vector<double>& x) {
  double s = 0;
  for (double v : x) s += v;
  return x.empty() ? kNaN : s / double(x.size());
}

double oracle_population_variance(const std::vector<double>& x) {
  if (x.empty()) return kNaN;
  double m = oracle_mean(x);
  double s = 0;
  for (double v : x) s += (v - m) * (v - m);
  return s / double(x.size());
}

namespace {

int64_t floor_div(int64_t a, int64_t b) {
  int64_t q = a / b;
  return (a % b != 0 && (a < 0) != (b < 0)) ? q - 1 : q;
}

int64_t julian_day(int y, int m, int d) {
  int64_t a = (m - 14) / 12;
  return (1461 * (y + 4800 + a)) / 4 + (367 * (m - 2 - 12 * a)) / 12 -
         (3 * ((y + 4900 + a) / 100)) / 4 + d - 32075;
}

}  // namespace

OracleCivil oracle_civil(int64_t epoch_seconds) {
  int64_t days = floor_div(epoch_seconds, 86400);
  int64_t secs = epoch_seconds - days * 86400;
  int64_t jd = days + 2440588;  // Julian day of 1970-01-01

  int64_t l = jd + 68569;
  int64_t n = (4 * l) / 146097;
  l = l - (146097 * n + 3) / 4;
  int64_t i = (4000 * (l + 1)) / 1461001;
  l = l - (1461 * i) / 4 + 31;
  int64_t j = (80 * l) / 2447;
  int64_t day = l - (2447 * j) / 80;
  l = j / 11;
  int64_t month = j + 2 - 12 * l;
  int64_t year = 100 * (n - 49) + i + l;

  OracleCivil out;
  out.year = int(year);
  out.month = int(month);
  out.day = int(day);
  out.hour = int(secs / 3600);
  out.minute = int((secs % 3600) / 60);
  out.second = int(secs % 60);
  out.day_of_week = int(jd % 7);  // JD 0 was a Monday
  out.day_of_year = int(jd - julian_day(int(year), 1, 1) + 1);
  return out;
}

namespace {

std::string two(int v) {
  char buf[4];
  std::snprintf(buf, sizeof(buf), "%02d", v);
  return buf;
}

std::string random_timestamp(std::mt19937_64& rng, int year_lo, int year_hi) {
  int y = year_lo + int(rng() % uint64_t(year_hi - year_lo + 1));
  int mo = 1 + int(rng() % 12);
  int d = 1 + int(rng() % 28);
  int h = int(rng() % 24), mi = int(rng() % 60), s = int(rng() % 60);
  return std::to_string(y) + "-" + two(mo) + "-" + two(d) + " " + two(h) + ":" + two(mi) + ":" +
         two(s);
}

}  // namespace

TempFixture make_random_fixture(uint64_t seed, const FixtureOptions& opt) {
  namespace fs = std::filesystem;
  static std::atomic<uint64_t> counter{0};
  std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ULL + 1);

  fs::path dir = fs::temp_directory_path() /
                 ("onebm_fixture_" + std::to_string(seed) + "_" +
                  std::to_string(counter.fetch_add(1)));
  fs::create_directories(dir);

  int nt = 2 + int(rng() % uint64_t(std::max(1, opt.max_tables - 1)));
  std::vector<int> rows(nt);
  rows[0] = 5 + int(rng() % uint64_t(std::max(1, opt.max_main_rows - 4)));
  for (int i = 1; i < nt; ++i) rows[i] = 5 + int(rng() % uint64_t(std::max(1, opt.max_rows - 4)));

  struct Col {
    std::string name, type;
    std::vector<std::string> roles;
    std::vector<std::string> cells;  // empty string = null
  };
  std::vector<std::vector<Col>> cols(nt);

  auto add_pk = [&](int t) {
    Col c{"t" + std::to_string(t) + "id", "numerical", {}, {}};
    for (int r = 0; r < rows[t]; ++r) c.cells.push_back(std::to_string(r));
    cols[t].push_back(std::move(c));
  };
  auto add_numeric = [&](int t, const std::string& name, double null_rate,
                         std::vector<std::string> roles = {}) {
    Col c{name, "numerical", std::move(roles), {}};
    for (int r = 0; r < rows[t]; ++r) {
      if (double(rng() % 1000) / 1000.0 < null_rate)
        c.cells.push_back("");
      else
        c.cells.push_back(std::to_string(double(rng() % 100000) / 1000.0));
    }
    cols[t].push_back(std::move(c));
  };
  auto add_categorical = [&](int t, const std::string& name, double null_rate) {
    Col c{name, "categorical", {}, {}};
    const char* values[4] = {"a", "b", "c", "d"};
    for (int r = 0; r < rows[t]; ++r) {
      if (double(rng() % 1000) / 1000.0 < null_rate)
        c.cells.push_back("");
      else
        c.cells.push_back(values[rng() % 4]);
    }
    cols[t].push_back(std::move(c));
  };
  auto add_fk = [&](int t, const std::string& name, int referenced_rows, double null_rate) {
    Col c{name, "numerical", {}, {}};
    for (int r = 0; r < rows[t]; ++r) {
      if (double(rng() % 1000) / 1000.0 < null_rate)
        c.cells.push_back("");
      else
        c.cells.push_back(std::to_string(rng() % uint64_t(referenced_rows)));
    }
    cols[t].push_back(std::move(c));
  };
  auto add_shared = [&](int t, const std::string& name, int domain) {
    Col c{name, "numerical", {}, {}};
    for (int r = 0; r < rows[t]; ++r) c.cells.push_back(std::to_string(rng() % uint64_t(domain)));
    cols[t].push_back(std::move(c));
  };
  auto add_timestamp = [&](int t, const std::string& name, double null_rate,
                           std::vector<std::string> roles, int year_lo, int year_hi) {
    Col c{name, "timestamp", std::move(roles), {}};
    for (int r = 0; r < rows[t]; ++r) {
      if (double(rng() % 1000) / 1000.0 < null_rate)
        c.cells.push_back("");
      else
        c.cells.push_back(random_timestamp(rng, year_lo, year_hi));
    }
    cols[t].push_back(std::move(c));
  };

  for (int t = 0; t < nt; ++t) {
    add_pk(t);
    add_numeric(t, "v" + std::to_string(t), 0.05);
    add_categorical(t, "c" + std::to_string(t), 0.05);
  }
  add_numeric(0, "target", 0.2, {"target"});
  if (opt.with_time && rng() % 2) add_timestamp(0, "cut", 0.1, {"cutoff_time"}, 2017, 2017);
  for (int t = 1; t < nt; ++t)
    if (opt.with_time && rng() % 2)
      add_timestamp(t, "et" + std::to_string(t), 0.05, {"event_time"}, 2016, 2018);

  struct Rel {
    int lt;
    std::string lc;
    int rt;
    std::string rc;
  };
  std::vector<Rel> rels;
  for (int j = 1; j < nt; ++j) {
    int p = int(rng() % uint64_t(j));
    switch (rng() % 3) {
      case 0:  // parent FK -> child PK (many_to_one from parent)
        add_fk(p, "fk" + std::to_string(j), rows[j], 0.05);
        rels.push_back({p, "fk" + std::to_string(j), j, "t" + std::to_string(j) + "id"});
        break;
      case 1:  // parent PK -> child FK (one_to_many from parent)
        add_fk(j, "fk" + std::to_string(j), rows[p], 0.05);
        rels.push_back({p, "t" + std::to_string(p) + "id", j, "fk" + std::to_string(j)});
        break;
      default:  // shared non-key column (many_to_many)
        add_shared(p, "sk" + std::to_string(j), 5);
        add_shared(j, "sk" + std::to_string(j), 5);
        rels.push_back({p, "sk" + std::to_string(j), j, "sk" + std::to_string(j)});
    }
  }
  int extras = int(rng() % 3);
  for (int x = 0; x < extras && nt > 1; ++x) {
    int a = int(rng() % uint64_t(nt)), b = int(rng() % uint64_t(nt));
    if (a == b) continue;
    std::string name = "xk" + std::to_string(x);
    add_shared(a, name, 4);
    add_shared(b, name, 4);
    rels.push_back({a, name, b, name});
  }

  nlohmann::json schema;
  schema["main_table"] = "t0";
  schema["tables"] = nlohmann::json::array();
  for (int t = 0; t < nt; ++t) {
    nlohmann::json table;
    table["name"] = "t" + std::to_string(t);
    table["file"] = "t" + std::to_string(t) + ".csv";
    table["primary_key"] = "t" + std::to_string(t) + "id";
    table["columns"] = nlohmann::json::array();
    for (const Col& c : cols[t]) {
      nlohmann::json jc;
      jc["name"] = c.name;
      jc["type"] = c.type;
      if (!c.roles.empty()) jc["roles"] = c.roles;
      table["columns"].push_back(jc);
    }
    schema["tables"].push_back(table);

    std::ofstream csv(dir / ("t" + std::to_string(t) + ".csv"), std::ios::binary);
    for (size_t c = 0; c < cols[t].size(); ++c) csv << (c ? "," : "") << cols[t][c].name;
    csv << '\n';
    for (int r = 0; r < rows[t]; ++r) {
      for (size_t c = 0; c < cols[t].size(); ++c) csv << (c ? "," : "") << cols[t][c].cells[r];
      csv << '\n';
    }
  }
  schema["relations"] = nlohmann::json::array();
  for (const Rel& r : rels) {
    nlohmann::json jr;
    jr["left_table"] = "t" + std::to_string(r.lt);
    jr["left_column"] = r.lc;
    jr["right_table"] = "t" + std::to_string(r.rt);
    jr["right_column"] = r.rc;
    schema["relations"].push_back(jr);
  }

  std::ofstream js(dir / "schema.json", std::ios::binary);
  js << schema.dump(2) << '\n';

  TempFixture fixture;
  fixture.dir = dir.string();
  fixture.schema_path = (dir / "schema.json").string();
  return fixture;
}

void remove_fixture(const TempFixture& fixture) {
  std::error_code ec;
  std::filesystem::remove_all(fixture.dir, ec);
}

ScratchDir::ScratchDir() {
  static std::atomic<uint64_t> counter{0};
  std::filesystem::path p = std::filesystem::temp_directory_path() /
                            ("onebm_scratch_" + std::to_string(counter.fetch_add(1)) + "_" +
                             std::to_string(uint64_t(::getpid())));
  std::filesystem::create_directories(p);
  dir_ = p.string();
}

ScratchDir::~ScratchDir() {
  std::error_code ec;
  std::filesystem::remove_all(dir_, ec);
}

std::string ScratchDir::write(const std::string& name, const std::string& content) const {
  std::filesystem::path p = std::filesystem::path(dir_) / name;
  std::ofstream out(p, std::ios::binary);
  out << content;
  return p.string();
}

}  // namespace testsupport
