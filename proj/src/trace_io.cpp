#include "fmsos/trace_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "fmsos/errors.hpp"

namespace fmsos {
namespace {

class LineReader {
public:
  explicit LineReader(std::istream& in) : in_(in) {}

  // Next non-comment line; '#' lines are handed to `on_comment`.
  template <class F>
  bool next(std::string& line, F&& on_comment) {
    while (std::getline(in_, line)) {
      ++line_no_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      if (line.front() == '#') {
        on_comment(line);
        continue;
      }
      return true;
    }
    return false;
  }

  std::size_t line_no() const { return line_no_; }

private:
  std::istream& in_;
  std::size_t line_no_ = 0;
};

class Tokens {
public:
  Tokens(const std::string& line, std::size_t line_no) : in_(line), line_no_(line_no) {}

  std::string word() {
    std::string w;
    if (!(in_ >> w)) throw ParseError("BadRecord", line_no_, "record ends early");
    return w;
  }

  double real() {
    const std::string w = word();
    char* end = nullptr;
    const double v = std::strtod(w.c_str(), &end);
    if (end != w.c_str() + w.size()) throw ParseError("BadRecord", line_no_, "bad real '" + w + "'");
    return v;
  }

  std::size_t count() {
    const std::string w = word();
    char* end = nullptr;
    const unsigned long long v = std::strtoull(w.c_str(), &end, 10);
    if (w.empty() || w.front() == '-' || end != w.c_str() + w.size()) {
      throw ParseError("BadRecord", line_no_, "bad count '" + w + "'");
    }
    return static_cast<std::size_t>(v);
  }

  void expect(const char* keyword) {
    const std::string w = word();
    if (w != keyword) throw ParseError("BadRecord", line_no_, std::string("expected '") + keyword + "'");
  }

  void finish() {
    std::string extra;
    if (in_ >> extra) throw ParseError("BadRecord", line_no_, "trailing field '" + extra + "'");
  }

private:
  std::istringstream in_;
  std::size_t line_no_;
};

void write_header(std::ostream& out, const Prologue& header) {
  for (const auto& [key, value] : header) out << "# " << key << '=' << value << '\n';
}

void parse_comment(const std::string& line, Prologue& header) {
  std::string body = line.substr(1);
  if (!body.empty() && body.front() == ' ') body.erase(0, 1);
  const auto eq = body.find('=');
  if (eq == std::string::npos) return;
  header.emplace_back(body.substr(0, eq), body.substr(eq + 1));
}

void check_schema(LineReader& reader, const char* schema) {
  std::string line;
  if (!reader.next(line, [](const std::string&) {}) || line != schema) {
    throw ParseError("SchemaMismatch", reader.line_no(), std::string("expected '") + schema + "'");
  }
}

void write_matrix(std::ostream& out, const Eigen::MatrixXd& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out << ' ' << hex_double(m(r, c));
  }
}

Eigen::MatrixXd read_matrix(Tokens& t, int dim) {
  Eigen::MatrixXd m(dim, dim);
  for (int r = 0; r < dim; ++r) {
    for (int c = 0; c < dim; ++c) m(r, c) = t.real();
  }
  return m;
}

} // namespace

std::string hex_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

TraceWriter::TraceWriter(std::ostream& out, int dim, bool rotation_only, const Prologue& header) : out_(out) {
  out_ << kTraceSchema << '\n';
  write_header(out_, header);
  out_ << "dim " << dim << " rotation_only " << (rotation_only ? 1 : 0) << '\n';
}

void TraceWriter::append(const TraceRecord& r) {
  out_ << "r " << r.iteration << ' ' << hex_double(r.kappa) << ' ' << hex_double(r.log_likelihood) << ' '
       << move_name(r.move) << ' ' << (r.accepted ? 1 : 0) << ' ' << hex_double(r.interval_lower) << ' '
       << hex_double(r.interval_upper) << ' ' << r.k();
  write_matrix(out_, r.rotation);
  for (const auto& z : r.atoms) {
    for (Eigen::Index i = 0; i < z.size(); ++i) out_ << ' ' << hex_double(z[i]);
  }
  for (double v : r.psi) out_ << ' ' << hex_double(v);
  out_ << '\n';
}

void TraceWriter::finish(const MoveStats& stats) {
  out_ << "stats";
  for (auto v : stats.proposed) out_ << ' ' << v;
  for (auto v : stats.accepted) out_ << ' ' << v;
  out_ << '\n';
  out_.flush();
}

void write_trace(std::ostream& out, const ChainTrace& trace) {
  TraceWriter writer(out, trace.dim, trace.rotation_only, trace.header);
  for (const auto& r : trace.records) writer.append(r);
  writer.finish(trace.stats);
}

void write_trace(const std::string& path, const ChainTrace& trace) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  write_trace(out, trace);
}

ChainTrace read_trace(std::istream& in) {
  LineReader reader(in);
  check_schema(reader, kTraceSchema);
  ChainTrace trace;
  auto on_comment = [&trace](const std::string& line) { parse_comment(line, trace.header); };
  std::string line;
  if (!reader.next(line, on_comment)) throw ParseError("BadRecord", reader.line_no(), "missing dimension line");
  {
    Tokens t(line, reader.line_no());
    t.expect("dim");
    trace.dim = static_cast<int>(t.count());
    t.expect("rotation_only");
    trace.rotation_only = t.count() != 0;
    t.finish();
    if (trace.dim < 2) throw ParseError("BadRecord", reader.line_no(), "dimension must be >= 2");
  }
  while (reader.next(line, on_comment)) {
    Tokens t(line, reader.line_no());
    const std::string tag = t.word();
    if (tag == "stats") {
      for (auto& v : trace.stats.proposed) v = t.count();
      for (auto& v : trace.stats.accepted) v = t.count();
      t.finish();
      continue;
    }
    if (tag != "r") throw ParseError("BadRecord", reader.line_no(), "unknown line tag '" + tag + "'");
    TraceRecord r;
    r.iteration = t.count();
    r.kappa = t.real();
    r.log_likelihood = t.real();
    try {
      r.move = move_from_name(t.word());
    } catch (const Error& e) {
      throw ParseError("BadRecord", reader.line_no(), e.what());
    }
    r.accepted = t.count() != 0;
    r.interval_lower = t.real();
    r.interval_upper = t.real();
    const std::size_t k = t.count();
    r.rotation = read_matrix(t, trace.dim);
    r.atoms.resize(k);
    for (auto& z : r.atoms) {
      z.resize(trace.dim);
      for (int i = 0; i < trace.dim; ++i) z[i] = t.real();
    }
    r.psi.resize(k);
    for (auto& v : r.psi) v = t.real();
    t.finish();
    trace.records.push_back(std::move(r));
  }
  return trace;
}

ChainTrace read_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  return read_trace(in);
}

void write_state(std::ostream& out, const ModelState& state, const Prologue& header) {
  out << kStateSchema << '\n';
  write_header(out, header);
  out << "dim " << state.dim() << '\n';
  out << "kappa " << hex_double(state.kappa) << '\n';
  out << "rotation";
  write_matrix(out, state.rotation.matrix());
  out << '\n';
  out << "k " << state.k() << '\n';
  if (state.measure) {
    for (std::size_t j = 0; j < state.k(); ++j) {
      out << "atom " << hex_double(state.measure->psi(j));
      const auto& z = state.measure->atom(j).coords();
      for (Eigen::Index i = 0; i < z.size(); ++i) out << ' ' << hex_double(z[i]);
      out << '\n';
    }
  }
}

void write_state(const std::string& path, const ModelState& state, const Prologue& header) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  write_state(out, state, header);
}

ModelState read_state(std::istream& in) {
  LineReader reader(in);
  check_schema(reader, kStateSchema);
  auto skip = [](const std::string&) {};
  std::string line;
  auto next_tokens = [&](const char* keyword) {
    if (!reader.next(line, skip)) throw ParseError("BadRecord", reader.line_no(), "state file ends early");
    Tokens t(line, reader.line_no());
    t.expect(keyword);
    return t;
  };
  Tokens td = next_tokens("dim");
  const auto dim = static_cast<int>(td.count());
  td.finish();
  if (dim < 2) throw ParseError("BadRecord", reader.line_no(), "dimension must be >= 2");
  Tokens tk = next_tokens("kappa");
  const double kappa = tk.real();
  tk.finish();
  Tokens tr = next_tokens("rotation");
  Eigen::MatrixXd rot = read_matrix(tr, dim);
  tr.finish();
  Tokens tn = next_tokens("k");
  const std::size_t k = tn.count();
  tn.finish();
  std::vector<UnitVector> atoms;
  std::vector<double> psi;
  for (std::size_t j = 0; j < k; ++j) {
    Tokens ta = next_tokens("atom");
    psi.push_back(ta.real());
    Eigen::VectorXd z(dim);
    for (int i = 0; i < dim; ++i) z[i] = ta.real();
    ta.finish();
    try {
      atoms.push_back(UnitVector::from_unit(z));
    } catch (const DomainError& e) {
      throw ParseError("BadRecord", reader.line_no(), e.what());
    }
  }
  try {
    ModelState state{std::nullopt, RotationMatrix::from_matrix(rot), kappa};
    if (k > 0) state.measure = TargetMeasure(std::move(atoms), std::move(psi));
    if (!(kappa > 0.0)) throw DomainError("kappa must be positive");
    return state;
  } catch (const DomainError& e) {
    throw ParseError("BadRecord", reader.line_no(), e.what());
  }
}

ModelState read_state(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  return read_state(in);
}

} // namespace fmsos
