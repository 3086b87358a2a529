#include <gtest/gtest.h>

#include <random>
#include <set>

#include "cfgsmith/errors.h"
#include "cfgsmith/eval.h"
#include "cfgsmith/modular.h"
#include "testutil.h"

using namespace cfgsmith;

namespace {

const Sort kBv8 = Sort::bitvec(8);

// Chained adders. Part 1: y' = a + c1 (init y = 0). Part 2: z' = y + c2
// (init z = 0) where y enters as an input. The parent runs both.
TransitionSystem make_part1()
{
  Variable y{ "y", kBv8 }, a{ "a", kBv8 }, c1{ "c1", kBv8 };
  return TransitionSystem(
      { y, a, c1 }, mk_eq(mk_var(y), bv_const(0, 8)),
      mk_eq(mk_var(TransitionSystem::prime(y)),
            mk_bvadd(mk_var(a), mk_var(c1))),
      { { "y", kStateRole | kOutputRole },
        { "a", kInputRole },
        { "c1", kConfigRole } });
}

TransitionSystem make_part2()
{
  Variable z{ "z", kBv8 }, y{ "y", kBv8 }, c2{ "c2", kBv8 };
  return TransitionSystem(
      { z, y, c2 }, mk_eq(mk_var(z), bv_const(0, 8)),
      mk_eq(mk_var(TransitionSystem::prime(z)),
            mk_bvadd(mk_var(y), mk_var(c2))),
      { { "z", kStateRole | kOutputRole },
        { "y", kInputRole },
        { "c2", kConfigRole } });
}

TransitionSystem make_parent()
{
  Variable y{ "y", kBv8 }, z{ "z", kBv8 }, a{ "a", kBv8 };
  Variable c1{ "c1", kBv8 }, c2{ "c2", kBv8 };
  Term init = mk_and(mk_eq(mk_var(y), bv_const(0, 8)),
                     mk_eq(mk_var(z), bv_const(0, 8)));
  Term trans = mk_and(mk_eq(mk_var(TransitionSystem::prime(y)),
                            mk_bvadd(mk_var(a), mk_var(c1))),
                      mk_eq(mk_var(TransitionSystem::prime(z)),
                            mk_bvadd(mk_var(y), mk_var(c2))));
  return TransitionSystem({ y, z, a, c1, c2 }, init, trans,
                          { { "y", kStateRole | kOutputRole },
                            { "z", kStateRole | kOutputRole },
                            { "a", kInputRole },
                            { "c1", kConfigRole },
                            { "c2", kConfigRole } });
}

// a = 1,1; y@1 = 3 forces c1 = 2; z@2 = y@1 + c2 = 7 forces c2 = 4.
Trace parent_trace()
{
  Trace tr;
  tr.inputs = { { { { "a", 1 } } }, { { { "a", 1 } } } };
  tr.outputs = { { {} }, { { { "y", 3 } } }, { { { "z", 7 } } } };
  return tr;
}

Decomposition make_decomposition(Trace trace)
{
  ConfigProblem parent(make_parent(), 2, trace);
  ConfigProblem p1(make_part1(), 2, restrict_trace(trace, make_part1()));
  ConfigProblem p2(make_part2(), 2, restrict_trace(trace, make_part2()));
  return Decomposition(parent, p1, p2, { "y" });
}

SolverConfig solver_config()
{
  SolverConfig cfg;
  cfg.argv = { test::solver_path() };
  cfg.timeout_ms = 60'000;
  return cfg;
}

}  // namespace

TEST(RestrictTraceTest, ProjectsOntoPartRoles)
{
  Trace tr = parent_trace();
  Trace p1 = restrict_trace(tr, make_part1());
  ASSERT_EQ(p1.inputs.size(), 2u);
  EXPECT_EQ(p1.inputs[0].values.at("a"), std::optional<uint64_t>(1));
  ASSERT_EQ(p1.outputs.size(), 3u);
  EXPECT_TRUE(p1.outputs[0].values.empty());
  EXPECT_EQ(p1.outputs[1].values.at("y"), std::optional<uint64_t>(3));
  EXPECT_TRUE(p1.outputs[2].values.empty());  // z is not part 1's

  Trace p2 = restrict_trace(tr, make_part2());
  EXPECT_TRUE(p2.inputs[0].values.empty());  // y unconstrained as input
  EXPECT_TRUE(p2.outputs[1].values.empty());  // y is an input here, not output
  EXPECT_EQ(p2.outputs[2].values.at("z"), std::optional<uint64_t>(7));
}

TEST(DecompositionTest, ConstructorChecksShape)
{
  Trace tr = parent_trace();
  ConfigProblem parent(make_parent(), 2, tr);
  ConfigProblem p1(make_part1(), 2, restrict_trace(tr, make_part1()));
  ConfigProblem p2(make_part2(), 2, restrict_trace(tr, make_part2()));

  // k mismatch
  Trace short_tr;
  short_tr.inputs = { { { { "a", 1 } } } };
  short_tr.outputs = { { {} }, { {} } };
  ConfigProblem p1_short(make_part1(), 1, short_tr);
  EXPECT_THROW(Decomposition(parent, p1_short, p2, { "y" }), ModelError);

  // shared name missing from a part
  EXPECT_THROW(Decomposition(parent, p1, p2, { "a" }), ModelError);

  // sort clash on a common name
  Variable z{ "z", kBv8 }, y4{ "y", Sort::bitvec(4) }, c2{ "c2", kBv8 };
  TransitionSystem clash({ z, y4, c2 }, mk_eq(mk_var(z), bv_const(0, 8)),
                         bool_const(true),
                         { { "z", kStateRole | kOutputRole },
                           { "y", kInputRole },
                           { "c2", kConfigRole } });
  Trace empty2;
  empty2.inputs = { { {} }, { {} } };
  empty2.outputs = { { {} }, { {} }, { {} } };
  ConfigProblem bad(clash, 2, empty2);
  EXPECT_THROW(Decomposition(parent, p1, bad, {}), ModelError);
}

TEST(DecompositionTest, AllConditionsPass)
{
  DecompositionReport report =
      check_decomposition(make_decomposition(parent_trace()), solver_config());
  EXPECT_TRUE(report.transitions.passed());
  EXPECT_TRUE(report.inits.passed());
  EXPECT_TRUE(report.properties.passed());
  EXPECT_TRUE(report.config_cover.passed());
  EXPECT_TRUE(report.all_pass());
  EXPECT_NE(report.str().find("transitions:  pass"), std::string::npos);
}

TEST(DecompositionTest, WeakenedTransitionFailsWithCountermodel)
{
  Trace tr = parent_trace();
  ConfigProblem parent(make_parent(), 2, tr);

  // part 1 with its transition dropped entirely
  Variable y{ "y", kBv8 }, a{ "a", kBv8 }, c1{ "c1", kBv8 };
  TransitionSystem weak({ y, a, c1 }, mk_eq(mk_var(y), bv_const(0, 8)),
                        bool_const(true),
                        { { "y", kStateRole | kOutputRole },
                          { "a", kInputRole },
                          { "c1", kConfigRole } });
  ConfigProblem p1(weak, 2, restrict_trace(tr, weak));
  ConfigProblem p2(make_part2(), 2, restrict_trace(tr, make_part2()));
  Decomposition d(parent, p1, p2, { "y" });

  DecompositionReport report = check_decomposition(d, solver_config());
  EXPECT_FALSE(report.transitions.passed());
  EXPECT_TRUE(report.inits.passed());
  EXPECT_TRUE(report.properties.passed());
  EXPECT_TRUE(report.config_cover.passed());
  EXPECT_FALSE(report.all_pass());

  // the countermodel really does break the implication
  ASSERT_TRUE(report.transitions.countermodel.has_value());
  Term query = mk_and(mk_and(weak.trans(), make_part2().trans()),
                      mk_not(make_parent().trans()));
  EXPECT_TRUE(evaluate_bool(query, *report.transitions.countermodel));
}

TEST(DecompositionTest, UncoveredConfigFailsSyntactically)
{
  Trace tr = parent_trace();
  Variable y{ "y", kBv8 }, z{ "z", kBv8 }, a{ "a", kBv8 };
  Variable c1{ "c1", kBv8 }, c2{ "c2", kBv8 }, c3{ "c3", kBv8 };
  TransitionSystem parent_sys(
      { y, z, a, c1, c2, c3 }, make_parent().init(), make_parent().trans(),
      { { "y", kStateRole | kOutputRole },
        { "z", kStateRole | kOutputRole },
        { "a", kInputRole },
        { "c1", kConfigRole },
        { "c2", kConfigRole },
        { "c3", kConfigRole } });
  ConfigProblem parent(parent_sys, 2, tr);
  ConfigProblem p1(make_part1(), 2, restrict_trace(tr, make_part1()));
  ConfigProblem p2(make_part2(), 2, restrict_trace(tr, make_part2()));
  Decomposition d(parent, p1, p2, { "y" });

  DecompositionReport report = check_decomposition(d, solver_config());
  EXPECT_TRUE(report.transitions.passed());
  EXPECT_FALSE(report.config_cover.passed());
}

TEST(AbductTest, PropositionalExample)
{
  Variable x{ "x", Sort::boolean() }, y{ "y", Sort::boolean() },
      z{ "z", Sort::boolean() };
  Term phi = mk_and(mk_var(x), mk_or(mk_var(y), mk_var(z)));
  Assignment model;
  model.set_bool(x, true);
  model.set_bool(y, false);
  model.set_bool(z, true);

  Term psi = get_abduct(phi, model, AbductStrategy::all_free_vars());
  Term expected = mk_and_all(std::vector<Term>{ mk_eq(mk_var(x), bool_const(true)),
                               mk_eq(mk_var(y), bool_const(false)),
                               mk_eq(mk_var(z), bool_const(true)) });
  EXPECT_EQ(psi, expected);

  // ψ entails φ: every assignment satisfying ψ satisfies φ
  test::for_all_assignments({ x, y, z }, [&](const Assignment & a) {
    if (evaluate_bool(psi, a)) {
      EXPECT_TRUE(evaluate_bool(phi, a));
    }
  });
}

// Appendix-style abduct property: ψ ∧ ¬φ is unsat for every satisfiable
// random formula.
TEST(AbductTest, AllFreeVarsEntailment)
{
  std::mt19937 rng(99);
  std::vector<Variable> vars{ { "p", Sort::bitvec(3) },
                              { "q", Sort::bitvec(2) },
                              { "b", Sort::boolean() } };
  int checked = 0;
  for (int iter = 0; iter < 40 && checked < 15; ++iter) {
    Term phi = test::random_term(rng, vars, Sort::boolean(), 4);
    SatResult r = check_sat_formula(solver_config(), phi, vars);
    if (!r.is_sat()) continue;
    Term psi = get_abduct(phi, *r.model, AbductStrategy::all_free_vars());
    SatResult counter =
        check_sat_formula(solver_config(), mk_and(psi, mk_not(phi)));
    EXPECT_TRUE(counter.is_unsat()) << to_string(phi);
    ++checked;
  }
  EXPECT_GE(checked, 15);
}

TEST(AbductTest, InterfaceOnlySelectsNames)
{
  Variable y0{ "y@0", kBv8 }, y1{ "y@1", kBv8 }, c0{ "c@0", kBv8 };
  Term phi = mk_and_all(std::vector<Term>{ mk_eq(mk_var(y1), mk_bvadd(mk_var(y0), mk_var(c0))),
                          mk_bvult(mk_var(y0), bv_const(9, 8)) });
  Assignment model;
  model.set_bv(y0, 1);
  model.set_bv(y1, 4);
  model.set_bv(c0, 3);

  // base name pins every step of y
  Term by_base =
      get_abduct(phi, model, AbductStrategy::interface_only({ "y" }));
  EXPECT_EQ(by_base, mk_and(mk_eq(mk_var(y0), bv_const(1, 8)),
                            mk_eq(mk_var(y1), bv_const(4, 8))));

  // exact timed name pins exactly that step
  Term by_step =
      get_abduct(phi, model, AbductStrategy::interface_only({ "y@1" }));
  EXPECT_EQ(by_step, mk_eq(mk_var(y1), bv_const(4, 8)));

  // a name matching nothing pins nothing
  Term vacuous =
      get_abduct(phi, model, AbductStrategy::interface_only({ "nope" }));
  EXPECT_EQ(vacuous, bool_const(true));
}

TEST(AbductTest, IncompleteModelRejected)
{
  Variable x{ "x", kBv8 };
  Term phi = mk_bvult(mk_var(x), bv_const(9, 8));
  Assignment empty;
  EXPECT_THROW(get_abduct(phi, empty, AbductStrategy::all_free_vars()),
               ModelError);
}

/// Amalgamation: with the interface covered, merging the two stage models
// satisfies both formulas at once.
TEST(AbductTest, InterfaceAmalgamation)
{
  std::mt19937 rng(7);
  Variable x{ "x", Sort::bitvec(3) }, sh{ "sh", Sort::bitvec(3) },
      z{ "z", Sort::bitvec(3) };
  int checked = 0;
  for (int iter = 0; iter < 60 && checked < 12; ++iter) {
    Term phi1 = test::random_term(rng, { x, sh }, Sort::boolean(), 3);
    Term phi2 = test::random_term(rng, { sh, z }, Sort::boolean(), 3);
    SatResult r1 = check_sat_formula(solver_config(), phi1, { x, sh });
    if (!r1.is_sat()) continue;
    Term psi =
        get_abduct(phi1, *r1.model, AbductStrategy::interface_only({ "sh" }));
    SatResult r2 =
        check_sat_formula(solver_config(), mk_and(phi2, psi), { sh, z });
    if (!r2.is_sat()) continue;
    Assignment merged = r1.model->merged_with(*r2.model);
    EXPECT_TRUE(evaluate_bool(phi1, merged)) << to_string(phi1);
    EXPECT_TRUE(evaluate_bool(phi2, merged)) << to_string(phi2);
    ++checked;
  }
  EXPECT_GE(checked, 12);
}

TEST(SolveModularTest, ChainedAddersAllFreeVars)
{
  Decomposition d = make_decomposition(parent_trace());
  ModularResult r =
      solve_modular(d, AbductStrategy::all_free_vars(), solver_config());
  ASSERT_TRUE(r.is_sat());
  ASSERT_TRUE(r.configuration.has_value());
  EXPECT_EQ(r.configuration->get({ "c1", kBv8 }).v, 2u);
  EXPECT_EQ(r.configuration->get({ "c2", kBv8 }).v, 4u);
  EXPECT_FALSE(r.inconclusive_unsat);

  // Theorem-1 style soundness: the monolithic formula accepts it
  EXPECT_TRUE(recheck_monolithic(d.parent, *r.configuration,
                                 solver_config()));
}

TEST(SolveModularTest, ChainedAddersInterfaceOnly)
{
  Decomposition d = make_decomposition(parent_trace());
  ModularResult r = solve_modular(d, AbductStrategy::interface_only({ "y" }),
                                  solver_config());
  ASSERT_TRUE(r.is_sat());
  EXPECT_EQ(r.configuration->get({ "c1", kBv8 }).v, 2u);
  EXPECT_EQ(r.configuration->get({ "c2", kBv8 }).v, 4u);
  EXPECT_TRUE(recheck_monolithic(d.parent, *r.configuration,
                                 solver_config()));
}

TEST(SolveModularTest, UncoveredInterfaceRejected)
{
  Decomposition d = make_decomposition(parent_trace());
  EXPECT_THROW(solve_modular(d, AbductStrategy::interface_only({ "c1" }),
                             solver_config()),
               ModelError);
}

TEST(SolveModularTest, StageTwoUnsatIsInconclusive)
{
  // z@1 = 5 forces c2 = 5, then z@2 = y@1 + c2 = 8 contradicts 6.
  Trace tr;
  tr.inputs = { { { { "a", 1 } } }, { { { "a", 1 } } } };
  tr.outputs = { { {} },
                 { { { "y", 3 }, { "z", 5 } } },
                 { { { "z", 6 } } } };
  Decomposition d = make_decomposition(tr);
  ModularResult r =
      solve_modular(d, AbductStrategy::all_free_vars(), solver_config());
  EXPECT_EQ(r.status, SatResult::Status::kUnsat);
  EXPECT_TRUE(r.inconclusive_unsat);
  EXPECT_EQ(r.failed_stage, 2u);
  EXPECT_FALSE(r.configuration.has_value());
}

// When the trace leaves part 1 unconstrained, its solver may pick a
// model that strands part 2 even though the parent is configurable;
// either outcome is acceptable, but each has an obligation: sat must
// survive the monolithic re-check, unsat must be labeled inconclusive
// (and here the parent is in fact sat).
TEST(SolveModularTest, UnconstrainedStageOneIsInconclusiveNotWrong)
{
  Trace tr;
  tr.inputs = { { { { "a", 1 } } }, { { { "a", 1 } } } };
  tr.outputs = { { {} }, { { { "z", 0 } } }, { { { "z", 7 } } } };
  Decomposition d = make_decomposition(tr);
  ModularResult r =
      solve_modular(d, AbductStrategy::all_free_vars(), solver_config());
  if (r.is_sat()) {
    EXPECT_TRUE(recheck_monolithic(d.parent, *r.configuration,
                                   solver_config()));
  } else {
    EXPECT_TRUE(r.inconclusive_unsat);
    Term mono = build_config_formula(d.parent);
    EXPECT_TRUE(check_sat_formula(solver_config(), mono).is_sat());
  }
}

TEST(SolveModularTest, ThreePartChain)
{
  // y' = a + c1, w' = y + c2, z' = w + c3, all init 0.
  Variable y{ "y", kBv8 }, w{ "w", kBv8 }, z{ "z", kBv8 }, a{ "a", kBv8 };
  Variable c1{ "c1", kBv8 }, c2{ "c2", kBv8 }, c3{ "c3", kBv8 };
  auto prime = TransitionSystem::prime;

  TransitionSystem s1({ y, a, c1 }, mk_eq(mk_var(y), bv_const(0, 8)),
                      mk_eq(mk_var(prime(y)), mk_bvadd(mk_var(a), mk_var(c1))),
                      { { "y", kStateRole | kOutputRole },
                        { "a", kInputRole },
                        { "c1", kConfigRole } });
  TransitionSystem s2({ w, y, c2 }, mk_eq(mk_var(w), bv_const(0, 8)),
                      mk_eq(mk_var(prime(w)), mk_bvadd(mk_var(y), mk_var(c2))),
                      { { "w", kStateRole | kOutputRole },
                        { "y", kInputRole },
                        { "c2", kConfigRole } });
  TransitionSystem s3({ z, w, c3 }, mk_eq(mk_var(z), bv_const(0, 8)),
                      mk_eq(mk_var(prime(z)), mk_bvadd(mk_var(w), mk_var(c3))),
                      { { "z", kStateRole | kOutputRole },
                        { "w", kInputRole },
                        { "c3", kConfigRole } });
  TransitionSystem parent_sys(
      { y, w, z, a, c1, c2, c3 },
      mk_and_all(std::vector<Term>{ mk_eq(mk_var(y), bv_const(0, 8)),
                   mk_eq(mk_var(w), bv_const(0, 8)),
                   mk_eq(mk_var(z), bv_const(0, 8)) }),
      mk_and_all(std::vector<Term>{
          mk_eq(mk_var(prime(y)), mk_bvadd(mk_var(a), mk_var(c1))),
          mk_eq(mk_var(prime(w)), mk_bvadd(mk_var(y), mk_var(c2))),
          mk_eq(mk_var(prime(z)), mk_bvadd(mk_var(w), mk_var(c3))) }),
      { { "y", kStateRole | kOutputRole },
        { "w", kStateRole | kOutputRole },
        { "z", kStateRole | kOutputRole },
        { "a", kInputRole },
        { "c1", kConfigRole },
        { "c2", kConfigRole },
        { "c3", kConfigRole } });

  // y@1 = 3 → c1 = 2; w@2 = y@1 + c2 = 5 → c2 = 2;
  // z@2 = w@1 + c3 = (0 + 2) + c3 = 9 → c3 = 7.
  Trace tr;
  tr.inputs = { { { { "a", 1 } } }, { { { "a", 1 } } } };
  tr.outputs = { { {} },
                 { { { "y", 3 } } },
                 { { { "w", 5 }, { "z", 9 } } } };

  ConfigProblem parent(parent_sys, 2, tr);
  std::vector<ConfigProblem> parts = {
    ConfigProblem(s1, 2, restrict_trace(tr, s1)),
    ConfigProblem(s2, 2, restrict_trace(tr, s2)),
    ConfigProblem(s3, 2, restrict_trace(tr, s3)),
  };
  ModularResult r = solve_chain(parent, parts,
                                AbductStrategy::all_free_vars(),
                                solver_config());
  ASSERT_TRUE(r.is_sat());
  EXPECT_EQ(r.configuration->get(c1).v, 2u);
  EXPECT_EQ(r.configuration->get(c2).v, 2u);
  EXPECT_EQ(r.configuration->get(c3).v, 7u);
  EXPECT_TRUE(recheck_monolithic(parent, *r.configuration, solver_config()));
}

TEST(DecompositionSpecTest, ParsesAndValidates)
{
  DecompositionSpec spec = parse_decomposition_spec(
      "# memory tile split\n"
      "parent tile.sts\n"
      "part agg.sts\n"
      "part tb.sts   # chain order\n"
      "shared cycle flush\n"
      "strategy interface-only\n");
  EXPECT_EQ(spec.parent_path, "tile.sts");
  EXPECT_EQ(spec.part_paths,
            (std::vector<std::string>{ "agg.sts", "tb.sts" }));
  EXPECT_EQ(spec.shared_names,
            (std::vector<std::string>{ "cycle", "flush" }));
  EXPECT_EQ(spec.strategy, AbductStrategy::Kind::kInterfaceOnly);

  EXPECT_THROW(parse_decomposition_spec("part a.sts\npart b.sts\n"),
               ParseError);
  EXPECT_THROW(parse_decomposition_spec("parent p.sts\npart a.sts\n"),
               ParseError);
  EXPECT_THROW(
      parse_decomposition_spec("parent p.sts extra\npart a.sts\npart b\n"),
      ParseError);
  EXPECT_THROW(parse_decomposition_spec(
                   "parent p.sts\npart a.sts\npart b.sts\nstrategy greedy\n"),
               ParseError);
  EXPECT_THROW(parse_decomposition_spec(
                   "parent p.sts\npart a.sts\npart b.sts\nwibble\n"),
               ParseError);
}
