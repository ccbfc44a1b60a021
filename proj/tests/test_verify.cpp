#include <doctest.h>

#include <chrono>

#include "horndim/decompose.hpp"
#include "horndim/instrument.hpp"
#include "horndim/verify.hpp"
#include "support.hpp"

using namespace horndim;
using namespace std::chrono_literals;
using testing::load_fixture;

namespace {

oracle builtin(std::size_t budget) {
  return compose({trivial_safe, [](const program& q) { return exhaustive_safe(q); },
                  [budget](const program& q) { return bounded_unsafe(q, budget); }});
}

std::string sh_quote(const std::string& s) { return "'" + s + "'"; }

}  // namespace

TEST_CASE("bounded search on safe Fib stays unknown") {
  const auto r = bounded_unsafe(load_fixture("fib.chc"), 15);
  CHECK(r.result == verdict::unknown);
  CHECK_FALSE(r.witness.has_value());
}

TEST_CASE("bounded search finds the Fib counterexample") {
  const auto p = load_fixture("fib_unsafe.chc");
  CHECK(bounded_unsafe(p, 25).result == verdict::unknown);
  const auto r = bounded_unsafe(p, 26);
  REQUIRE(r.result == verdict::unsafe);
  REQUIRE(r.witness);
  CHECK(is_feasible_counterexample(p, *r.witness));
  CHECK(r.witness->size() <= 26);
}

TEST_CASE("bounded search agrees with plain enumeration") {
  std::mt19937_64 rng(31);
  for (int i = 0; i < 30; ++i) {
    const auto p = testing::random_program(rng, 4);
    const auto brute = testing::brute_force_counterexample(p, 7);
    const auto r = bounded_unsafe(p, 7);
    CHECK(r.result != verdict::safe);
    if (r.result == verdict::unsafe) CHECK(is_feasible_counterexample(p, *r.witness));
    CHECK_MESSAGE(brute.has_value() == (r.result == verdict::unsafe), render_program(p));
  }
}

TEST_CASE("contradictory integrity clause") {
  const auto p = assign_clause_ids(parse_program("false :- X>0, X<0."), "c");
  CHECK(bounded_unsafe(p, 5).result == verdict::unknown);
  const auto q = assign_clause_ids(parse_program("false :- X>0, X<2."), "c");
  const auto r = bounded_unsafe(q, 5);
  CHECK(r.result == verdict::unsafe);
  CHECK(to_string(*r.witness) == "c1");
}

TEST_CASE("trivially safe programs") {
  CHECK(trivial_safe(load_fixture("fib.chc")).result == verdict::unknown);
  CHECK(trivial_safe(load_fixture("empty.chc")).result == verdict::safe);
  CHECK(trivial_safe(assign_clause_ids(parse_program("p(X) :- p(X).\nfalse :- p(X)."), "c")).result == verdict::safe);
  // The at-most-0 program of a linear program with no non-linear clause is not empty.
  const auto linear = assign_clause_ids(parse_program("p(X) :- X=0.\nfalse :- p(X), X>1."), "c");
  CHECK(trivial_safe(linear).result == verdict::unknown);
  CHECK(trivial_safe(at_least_via_fta(linear, 0)).result == verdict::safe);
}

TEST_CASE("exhaustive check of non-recursive programs") {
  const auto low = at_most_k_unfolded(load_fixture("fib.chc"), 0);
  CHECK(exhaustive_safe(low).result == verdict::safe);
  CHECK(exhaustive_safe(load_fixture("fib.chc")).result == verdict::unknown);
  const auto p = assign_clause_ids(parse_program("p(X) :- X=0.\np(X) :- X=5.\nq(X) :- p(Y), p(Z), X=Y+Z.\nfalse :- q(X), X>9."), "c");
  const auto r = exhaustive_safe(p);
  REQUIRE(r.result == verdict::unsafe);
  CHECK(to_string(*r.witness) == "c4(c3(c2,c2))");
  CHECK(exhaustive_safe(p, 2).result == verdict::unknown);
  // A recursive predicate off the query path does not matter.
  const auto q = assign_clause_ids(parse_program("r(X) :- r(X).\nfalse :- X>0, X<0."), "c");
  CHECK(exhaustive_safe(q).result == verdict::safe);
}

TEST_CASE("query roots") {
  const auto low = at_most_k_unfolded(load_fixture("fib.chc"), 0);
  CHECK(query_roots(low) == std::set<pred_key>{pred_key::at_most("false", 0)});
}

TEST_CASE("SMT-LIB export") {
  const auto p = assign_clause_ids(parse_program("p(X) :- X=0.\np(X) :- p(Y), X=Y-1.\nfalse :- p(X), X>2."), "c");
  CHECK(emit_smtlib_horn(p) ==
        "(set-logic HORN)\n"
        "(declare-fun p (Int) Bool)\n"
        "(assert (forall ((X Int)) (=> (= X 0) (p X))))\n"
        "(assert (forall ((X Int) (Y Int)) (=> (and (= X (+ Y (- 1))) (p Y)) (p X))))\n"
        "(assert (forall ((X Int)) (=> (and (> X 2) (p X)) false)))\n"
        "(check-sat)\n");
}

TEST_CASE("SMT-LIB export of annotated and reserved names") {
  const auto low = at_most_k_unfolded(load_fixture("fib.chc"), 0);
  const auto text = emit_smtlib_horn(low);
  CHECK(text.find("(declare-fun fib_ex_0 (Int Int) Bool)") != std::string::npos);
  CHECK(text.find("false_am_0") != std::string::npos);
  CHECK(text.find("(check-sat)") != std::string::npos);
  const auto odd = assign_clause_ids(parse_program("p(Int) :- Int=2*Int."), "c");
  CHECK(emit_smtlib_horn(odd).find("|Int|") != std::string::npos);
}

TEST_CASE("external oracle verdicts") {
  const auto p = load_fixture("fib.chc");
  CHECK(external_oracle("echo sat; true {file}", p, 5s).result == verdict::safe);
  CHECK(external_oracle("echo unsat; true {file}", p, 5s).result == verdict::unsafe);
  CHECK(external_oracle("echo unknown; true {file}", p, 5s).result == verdict::unknown);
  CHECK(external_oracle("echo sat", p, 5s).result == verdict::unknown);
  CHECK(external_oracle("grep -q check-sat {file} && echo sat", p, 5s).result == verdict::safe);
  CHECK(external_oracle("/nonexistent/solver {file}", p, 5s).result == verdict::unknown);
}

TEST_CASE("external oracle timeout") {
  const auto start = std::chrono::steady_clock::now();
  const auto r = external_oracle("sleep 30; echo sat; true {file}", load_fixture("fib.chc"), 300ms);
  const auto took = std::chrono::steady_clock::now() - start;
  CHECK(r.result == verdict::unknown);
  CHECK(took < 5s);
}

#ifdef HORNDIM_Z3
TEST_CASE("z3 as the oracle") {
  const std::string cmd = sh_quote(HORNDIM_Z3) + " -T:20 {file}";
  CHECK(external_oracle(cmd, load_fixture("fib.chc"), 30s).result == verdict::safe);
  CHECK(external_oracle(cmd, load_fixture("fib_unsafe.chc"), 30s).result == verdict::unsafe);
  const auto out = verify_loop(load_fixture("fib.chc"),
                               [&](const program& q) { return external_oracle(cmd, q, 30s); });
  CHECK(out.result == verdict::safe);
}
#endif

TEST_CASE("verify without integrity clauses") {
  const auto out = verify_loop(load_fixture("fib_plain.chc"), builtin(10));
  CHECK(out.result == verdict::safe);
  CHECK(out.resolved_k == 0u);
  CHECK(out.side == branch::at_most);
}

TEST_CASE("verify stops when the low branch is unknown") {
  const auto out = verify_loop(load_fixture("fib.chc"), builtin(10));
  CHECK(out.result == verdict::unknown);
  // At-most-0 has finitely many derivations; at-most-1 is recursive.
  CHECK(out.resolved_k == 1u);
  CHECK(out.side == branch::at_most);
}

TEST_CASE("verify finds a counterexample of dimension above 0") {
  const auto p = load_fixture("fib_unsafe.chc");
  for (auto mode : {at_least_mode::direct, at_least_mode::fta}) {
    const auto out = verify_loop(p, builtin(30), {3, mode});
    REQUIRE(out.result == verdict::unsafe);
    CHECK(out.side == branch::at_least);
    CHECK(out.resolved_k == 0u);
    REQUIRE(out.witness);
    CHECK(is_feasible_counterexample(p, *out.witness));
  }
}

TEST_CASE("verify on a linear unsafe program") {
  const auto p = assign_clause_ids(parse_program("p(X) :- X=0.\np(X) :- p(Y), X=Y+1.\nfalse :- p(X), X>3."), "c");
  const auto out = verify_loop(p, builtin(10));
  REQUIRE(out.result == verdict::unsafe);
  CHECK(out.side == branch::at_most);
  CHECK(to_string(*out.witness) == "c3(c2(c2(c2(c2(c1)))))");
}

TEST_CASE("verify on a linear safe program") {
  const auto p = assign_clause_ids(parse_program("p(X) :- X=0.\np(X) :- p(Y), X=Y+1, X=<3.\nfalse :- p(X), X>3."), "c");
  // The built-in oracles cannot prove the low branch safe.
  CHECK(verify_loop(p, builtin(10)).result == verdict::unknown);
  oracle fake = [](const program& q) -> oracle_verdict {
    // Claims safety of every program with no tree of size 12 reaching false.
    if (bounded_unsafe(q, 12).result == verdict::unsafe) return {verdict::unsafe, std::nullopt, ""};
    return {verdict::safe, std::nullopt, ""};
  };
  const auto out = verify_loop(p, fake);
  CHECK(out.result == verdict::safe);
  CHECK(out.side == branch::at_least);
  CHECK(out.resolved_k == 0u);
}

TEST_CASE("witnesses that fail validation are discarded") {
  const auto p = load_fixture("fib.chc");
  oracle liar = [](const program& q) -> oracle_verdict {
    if (query_roots(q).contains(pred_key::at_most("false", 0))) return {verdict::safe, std::nullopt, ""};
    return {verdict::unsafe, parse_tree("c3(c2(c1,c1))"), ""};
  };
  const auto out = verify_loop(p, liar, {1, at_least_mode::direct});
  CHECK(out.result == verdict::unknown);
}

TEST_CASE("shrinking and parallel oracles keep the verdict") {
  const auto p = load_fixture("fib_unsafe.chc");
  for (bool shrink : {false, true}) {
    for (bool parallel : {false, true}) {
      verify_options o;
      o.shrink = shrink;
      o.parallel = parallel;
      const auto out = verify_loop(p, builtin(30), o);
      CHECK(out.result == verdict::unsafe);
      REQUIRE(out.witness);
      CHECK(is_feasible_counterexample(p, *out.witness));
    }
  }
}

TEST_CASE("shrinking on a program with a binary rule") {
  const auto p = assign_clause_ids(parse_program("p(X) :- X=0.\n"
                                                 "p(X) :- p(Y), p(Z), X=Y+Z+1.\n"
                                                 "false :- p(X), X>=3."),
                                   "c");
  for (bool shrink : {false, true}) {
    verify_options o;
    o.shrink = shrink;
    o.mode = at_least_mode::direct;
    const auto out = verify_loop(p, builtin(12), o);
    REQUIRE(out.result == verdict::unsafe);
    REQUIRE(out.witness);
    CHECK(is_feasible_counterexample(p, *out.witness));
  }
}

TEST_CASE("verify needs clause ids") {
  CHECK_THROWS_AS(verify_loop(parse_program("false :- X>0."), builtin(3)), error);
}

TEST_CASE("verdict names") {
  CHECK(to_string(verdict::safe) == "safe");
  CHECK(to_string(verdict::unsafe) == "unsafe");
  CHECK(to_string(verdict::unknown) == "unknown");
  CHECK(to_string(branch::at_most) == "at-most");
  CHECK(to_string(branch::at_least) == "at-least");
}
