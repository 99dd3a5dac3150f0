#include "nnid/report.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

namespace nnid {

namespace {

constexpr std::array<const char*, 6> kBlockColumns{
    "wn_M_hidden", "wn_M_output", "wn_C_hidden",
    "wn_C_output", "wn_G_hidden", "wn_G_output"};

void joint_columns(std::vector<std::string>& h, const char* prefix,
                   std::size_t n) {
  for (std::size_t j = 1; j <= n; ++j) h.push_back(fmt::format("{}{}", prefix, j));
}

void put(fmt::memory_buffer& buf, double v) {
  fmt::format_to(std::back_inserter(buf), ",{:.17g}", v);
}

void put(fmt::memory_buffer& buf, const Vec& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) put(buf, v(i));
}

}  // namespace

std::vector<std::string> run_csv_header(std::size_t n) {
  std::vector<std::string> h{"t"};
  joint_columns(h, "q", n);
  joint_columns(h, "qd", n);
  joint_columns(h, "qdd", n);
  joint_columns(h, "tau", n);
  joint_columns(h, "qm", n);
  joint_columns(h, "qf", n);
  joint_columns(h, "qdf", n);
  joint_columns(h, "qddf", n);
  joint_columns(h, "qref", n);
  joint_columns(h, "tauhat", n);
  joint_columns(h, "e1_", n);
  joint_columns(h, "e2_", n);
  joint_columns(h, "e3_", (n * n - n) / 2);
  joint_columns(h, "e4_", n);
  for (const char* c : {"eps_norm", "emod_norm", "dead_zone_active",
                        "weights_changed", "V", "dV", "region"}) {
    h.emplace_back(c);
  }
  for (const char* c : kBlockColumns) h.emplace_back(c);
  for (const char* c : {"weight_step", "fallback", "err_M", "err_C", "err_G"}) {
    h.emplace_back(c);
  }
  return h;
}

void write_run_csv(std::ostream& os, const RunLog& log) {
  const auto header = run_csv_header(log.dof);
  for (std::size_t i = 0; i < header.size(); ++i) {
    os << (i ? "," : "") << header[i];
  }
  os << '\n';
  fmt::memory_buffer buf;
  for (const auto& r : log.steps) {
    buf.clear();
    fmt::format_to(std::back_inserter(buf), "{:.17g}", r.t);
    for (const Vec* v : {&r.q, &r.qdot, &r.qddot, &r.tau, &r.q_meas, &r.q_f,
                         &r.qdot_f, &r.qddot_f, &r.q_ref, &r.tau_hat, &r.e1,
                         &r.e2, &r.e3, &r.e4}) {
      put(buf, *v);
    }
    put(buf, r.eps_norm);
    put(buf, r.emod_norm);
    put(buf, r.in_dead_zone ? 1.0 : 0.0);
    put(buf, r.weights_changed ? 1.0 : 0.0);
    put(buf, r.V);
    put(buf, r.dV);
    put(buf, static_cast<double>(static_cast<int>(r.region)));
    for (double w : r.weight_norms) put(buf, w);
    put(buf, r.weight_step);
    put(buf, r.fallback ? 1.0 : 0.0);
    put(buf, r.err_M);
    put(buf, r.err_C);
    put(buf, r.err_G);
    buf.push_back('\n');
    os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  }
}

const std::vector<double>& CsvTable::col(const std::string& name) const {
  const auto it = columns.find(name);
  if (it == columns.end()) {
    throw std::invalid_argument("csv: no column '" + name + "'");
  }
  return it->second;
}

CsvTable read_csv(std::istream& is) {
  CsvTable t;
  std::string line;
  if (!std::getline(is, line)) throw std::invalid_argument("csv: empty input");
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    t.header.push_back(line.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  std::vector<std::vector<double>*> cols;
  for (const auto& h : t.header) {
    if (t.columns.count(h)) throw std::invalid_argument("csv: duplicate column " + h);
    cols.push_back(&t.columns[h]);
  }
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const char* p = line.data();
    const char* end = p + line.size();
    for (std::size_t c = 0; c < cols.size(); ++c) {
      double v = 0.0;
      const auto [next, ec] = std::from_chars(p, end, v);
      if (ec != std::errc{}) {
        throw std::invalid_argument(
            fmt::format("csv: bad number in row {}, column {}", t.rows + 1,
                        t.header[c]));
      }
      cols[c]->push_back(v);
      p = next;
      if (c + 1 < cols.size()) {
        if (p == end || *p != ',') {
          throw std::invalid_argument(
              fmt::format("csv: short row {}", t.rows + 1));
        }
        ++p;
      }
    }
    if (p != end) {
      throw std::invalid_argument(fmt::format("csv: long row {}", t.rows + 1));
    }
    ++t.rows;
  }
  return t;
}

CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open '" + path + "'");
  return read_csv(in);
}

std::size_t table_dof(const CsvTable& t) {
  std::size_t n = 0;
  while (t.has(fmt::format("q{}", n + 1))) ++n;
  return n;
}

double column_mean(const CsvTable& t, const std::string& name,
                   std::size_t begin, std::size_t end) {
  const auto& c = t.col(name);
  end = std::min(end, c.size());
  if (begin >= end) return 0.0;
  double s = 0.0;
  for (std::size_t i = begin; i < end; ++i) s += c[i];
  return s / static_cast<double>(end - begin);
}

namespace {

double rms_e1(const CsvTable& t, std::size_t n, std::size_t begin,
              std::size_t end) {
  if (begin >= end) return 0.0;
  double s = 0.0;
  for (std::size_t j = 1; j <= n; ++j) {
    const auto& c = t.col(fmt::format("e1_{}", j));
    for (std::size_t i = begin; i < end; ++i) s += c[i] * c[i];
  }
  return std::sqrt(s / static_cast<double>(end - begin));
}

double sup(const std::vector<double>& c, std::size_t begin) {
  double m = 0.0;
  for (std::size_t i = begin; i < c.size(); ++i) m = std::max(m, c[i]);
  return m;
}

double variance(const std::vector<double>& c, std::size_t begin) {
  if (begin >= c.size()) return 0.0;
  const double count = static_cast<double>(c.size() - begin);
  double mean = 0.0;
  for (std::size_t i = begin; i < c.size(); ++i) mean += c[i];
  mean /= count;
  double s = 0.0;
  for (std::size_t i = begin; i < c.size(); ++i) s += (c[i] - mean) * (c[i] - mean);
  return s / count;
}

}  // namespace

SummaryReport summarize(const CsvTable& t) {
  SummaryReport s;
  s.dof = table_dof(t);
  s.steps = t.rows;
  const std::size_t N = t.rows;
  if (N == 0) return s;
  const auto& time = t.col("t");
  s.duration = time.back();

  const std::size_t w = std::max<std::size_t>(1, N / 20);
  s.rms_e1_first = rms_e1(t, s.dof, 0, w);
  s.rms_e1_last = rms_e1(t, s.dof, N - w, N);
  s.e1_ratio = s.rms_e1_first > 0.0 ? s.rms_e1_last / s.rms_e1_first
                                    : std::numeric_limits<double>::infinity();

  const auto& emod = t.col("emod_norm");
  s.sup_emod_late = sup(emod, N / 2);
  s.sup_emod_post_transient = sup(emod, N / 5);

  const auto& dz = t.col("dead_zone_active");
  const auto& changed = t.col("weights_changed");
  const auto& dV = t.col("dV");
  std::size_t negative = 0;
  for (std::size_t i = 0; i < N; ++i) {
    if (dz[i] != 0.0) {
      ++s.frozen_steps;
      if (changed[i] != 0.0) ++s.frozen_steps_with_weight_change;
    } else if (i > 0) {
      // Row 0 has no previous V, so its dV carries no information.
      ++s.steps_outside_dead_zone;
      if (dV[i] < 0.0) ++negative;
    }
  }
  s.frac_dV_negative_outside =
      s.steps_outside_dead_zone
          ? static_cast<double>(negative) /
                static_cast<double>(s.steps_outside_dead_zone)
          : 0.0;

  s.mean_err_M_first = column_mean(t, "err_M", 0, w);
  s.mean_err_M_last = column_mean(t, "err_M", N - w, N);
  s.mean_err_C_first = column_mean(t, "err_C", 0, w);
  s.mean_err_C_last = column_mean(t, "err_C", N - w, N);
  s.mean_err_G_first = column_mean(t, "err_G", 0, w);
  s.mean_err_G_last = column_mean(t, "err_G", N - w, N);

  for (std::size_t j = 1; j <= s.dof; ++j) {
    const auto& q = t.col(fmt::format("q{}", j));
    const auto& qr = t.col(fmt::format("qref{}", j));
    const auto& tau = t.col(fmt::format("tau{}", j));
    double se = 0.0, st = 0.0, tv = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      se += (q[i] - qr[i]) * (q[i] - qr[i]);
      st += tau[i] * tau[i];
      if (i > 0) tv += std::abs(tau[i] - tau[i - 1]);
    }
    s.tracking_rms.push_back(std::sqrt(se / static_cast<double>(N)));
    s.effort_rms.push_back(std::sqrt(st / static_cast<double>(N)));
    s.effort_tv.push_back(tv);
  }

  for (double v : t.col("weight_step")) s.weight_tv += v;
  for (const char* c : kBlockColumns) {
    s.late_weight_norm_variance += variance(t.col(c), N - N / 4);
  }
  s.fallback_fraction = column_mean(t, "fallback", 0, N);
  return s;
}

void write_summary(std::ostream& os, const SummaryReport& s) {
  const auto line = [&os](const char* key, double v) {
    os << fmt::format("{} = {:.17g}\n", key, v);
  };
  const auto list = [&os](const char* key, const std::vector<double>& v) {
    os << key << " =";
    for (std::size_t i = 0; i < v.size(); ++i) {
      os << (i ? ", " : " ") << fmt::format("{:.17g}", v[i]);
    }
    os << '\n';
  };
  os << "dof = " << s.dof << '\n';
  os << "steps = " << s.steps << '\n';
  line("duration", s.duration);
  line("rms_e1_first", s.rms_e1_first);
  line("rms_e1_last", s.rms_e1_last);
  line("e1_ratio", s.e1_ratio);
  line("sup_emod_late", s.sup_emod_late);
  line("sup_emod_post_transient", s.sup_emod_post_transient);
  os << "steps_outside_dead_zone = " << s.steps_outside_dead_zone << '\n';
  line("frac_dV_negative_outside", s.frac_dV_negative_outside);
  os << "frozen_steps = " << s.frozen_steps << '\n';
  os << "frozen_steps_with_weight_change = " << s.frozen_steps_with_weight_change
     << '\n';
  line("mean_err_M_first", s.mean_err_M_first);
  line("mean_err_M_last", s.mean_err_M_last);
  line("mean_err_C_first", s.mean_err_C_first);
  line("mean_err_C_last", s.mean_err_C_last);
  line("mean_err_G_first", s.mean_err_G_first);
  line("mean_err_G_last", s.mean_err_G_last);
  list("tracking_rms", s.tracking_rms);
  list("effort_rms", s.effort_rms);
  list("effort_tv", s.effort_tv);
  line("weight_tv", s.weight_tv);
  line("late_weight_norm_variance", s.late_weight_norm_variance);
  line("fallback_fraction", s.fallback_fraction);
}

double time_to_threshold(const CsvTable& table, double threshold) {
  const auto& t = table.col("t");
  const auto& e = table.col("emod_norm");
  bool above = false;
  for (std::size_t i = 0; i < e.size(); ++i) {
    if (e[i] > threshold) {
      above = true;
    } else if (above) {
      return t[i];
    }
  }
  return above ? std::numeric_limits<double>::infinity() : 0.0;
}

}  // namespace nnid
