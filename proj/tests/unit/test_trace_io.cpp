#include <doctest.h>

#include <sstream>

#include "fmsos/errors.hpp"
#include "fmsos/trace_io.hpp"

using namespace fmsos;

namespace {

TraceRecord make_record(std::size_t it, std::size_t k, Rng& rng) {
  TraceRecord r;
  r.iteration = it;
  r.kappa = 10.0 + std::uniform_real_distribution<double>(0, 100)(rng);
  r.log_likelihood = -123.456789012345 * static_cast<double>(it + 1);
  r.rotation = sample_haar_rotation(2, rng).matrix();
  for (std::size_t j = 0; j < k; ++j) {
    r.atoms.push_back(sample_uniform_sphere(2, rng).coords());
    r.psi.push_back(std::uniform_real_distribution<double>(-1, 1)(rng));
  }
  r.move = static_cast<MoveType>(it % 5);
  r.accepted = it % 2 == 0;
  if (r.move != MoveType::kNone) {
    r.interval_lower = -0.1 * static_cast<double>(it);
    r.interval_upper = 0.3;
  }
  return r;
}

void check_same(const ChainTrace& a, const ChainTrace& b) {
  CHECK(a.dim == b.dim);
  CHECK(a.rotation_only == b.rotation_only);
  CHECK(a.header == b.header);
  CHECK(a.stats.proposed == b.stats.proposed);
  CHECK(a.stats.accepted == b.stats.accepted);
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    const auto& x = a.records[i];
    const auto& y = b.records[i];
    CHECK(x.iteration == y.iteration);
    CHECK(x.kappa == y.kappa);
    CHECK(x.log_likelihood == y.log_likelihood);
    CHECK(x.rotation == y.rotation);
    CHECK(x.atoms == y.atoms);
    CHECK(x.psi == y.psi);
    CHECK(x.move == y.move);
    CHECK(x.accepted == y.accepted);
    CHECK((x.interval_lower == y.interval_lower || (std::isnan(x.interval_lower) && std::isnan(y.interval_lower))));
    CHECK((x.interval_upper == y.interval_upper || (std::isnan(x.interval_upper) && std::isnan(y.interval_upper))));
  }
}

ChainTrace round_trip(const ChainTrace& t) {
  std::stringstream buf;
  write_trace(buf, t);
  return read_trace(buf);
}

} // namespace

TEST_CASE("empty trace round trips") {
  ChainTrace t;
  t.header = {{"seed", "4"}, {"note", "a b=c"}};
  check_same(t, round_trip(t));
}

TEST_CASE("100-record trace round trips bit-exactly") {
  Rng rng = make_rng(121);
  ChainTrace t;
  t.header = {{"seed", "121"}};
  for (std::size_t i = 0; i < 100; ++i) t.records.push_back(make_record(i, 1 + i % 6, rng));
  t.stats.proposed = {1, 2, 3, 4, 5, 6};
  t.stats.accepted = {0, 1, 2, 3, 4, 5};
  check_same(t, round_trip(t));
}

TEST_CASE("records keep variable-length atom lists") {
  Rng rng = make_rng(122);
  ChainTrace t;
  for (std::size_t k : {2u, 3u, 2u}) t.records.push_back(make_record(t.records.size(), k, rng));
  const ChainTrace back = round_trip(t);
  CHECK(back.records[0].k() == 2);
  CHECK(back.records[1].k() == 3);
  CHECK(back.records[2].k() == 2);
  check_same(t, back);
}

TEST_CASE("rotation-only traces round trip") {
  Rng rng = make_rng(123);
  ChainTrace t;
  t.rotation_only = true;
  for (std::size_t i = 0; i < 5; ++i) t.records.push_back(make_record(i, 0, rng));
  check_same(t, round_trip(t));
}

TEST_CASE("streaming writer matches the batch writer") {
  Rng rng = make_rng(124);
  ChainTrace t;
  t.header = {{"chain", "0"}};
  for (std::size_t i = 0; i < 10; ++i) t.records.push_back(make_record(i, 3, rng));
  std::ostringstream batch;
  write_trace(batch, t);
  std::ostringstream streamed;
  TraceWriter w(streamed, t.dim, t.rotation_only, t.header);
  for (const auto& r : t.records) w.append(r);
  w.finish(t.stats);
  CHECK(batch.str() == streamed.str());
}

TEST_CASE("malformed traces are rejected") {
  std::istringstream wrong("fmsos-trace v9\n");
  try {
    read_trace(wrong);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.kind() == "SchemaMismatch");
  }
  std::istringstream bad("fmsos-trace v1\ndim 3 rotation_only 0\nr 1 2\n");
  try {
    read_trace(bad);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.kind() == "BadRecord");
    CHECK(e.line() == 3);
  }
}

TEST_CASE("state files round trip") {
  Rng rng = make_rng(125);
  PriorConfig prior;
  const ReferenceCloud cloud = ReferenceCloud::sample(2, 2000, 126);
  const ModelState s = sample_prior_dual(prior, cloud, rng, 4);
  std::stringstream buf;
  write_state(buf, s, {{"seed", "125"}});
  const ModelState back = read_state(buf);
  CHECK(back.kappa == s.kappa);
  CHECK(back.rotation.matrix() == s.rotation.matrix());
  REQUIRE(back.k() == 4);
  CHECK(back.measure->psi() == s.measure->psi());
  for (std::size_t j = 0; j < 4; ++j) {
    CHECK((back.measure->atom(j).coords() - s.measure->atom(j).coords()).norm() < 1e-15);
  }

  const ModelState rot{std::nullopt, sample_haar_rotation(2, rng), 3.0};
  std::stringstream b2;
  write_state(b2, rot);
  CHECK(read_state(b2).k() == 0);

  std::istringstream bad("fmsos-state v1\ndim 3\nkappa -1\n");
  CHECK_THROWS_AS(read_state(bad), ParseError);
}

TEST_CASE("hex doubles are exact") {
  for (double v : {0.1, -1e-300, 3.141592653589793, 1e300}) {
    CHECK(std::strtod(hex_double(v).c_str(), nullptr) == v);
  }
}
