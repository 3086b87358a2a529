#include <gtest/gtest.h>

#include <random>

#include "cfgsmith/eval.h"
#include "cfgsmith/transition_system.h"
#include "testutil.h"

using namespace cfgsmith;

namespace {

Assignment bv_inputs(uint64_t a)
{
  Assignment s;
  s.set_bv(Variable{ "a", Sort::bitvec(8) }, a);
  return s;
}

}  // namespace

TEST(RolesTest, FromName)
{
  EXPECT_EQ(role_from_name("input"), unsigned(kInputRole));
  EXPECT_EQ(role_from_name("output"), unsigned(kOutputRole));
  EXPECT_EQ(role_from_name("config"), unsigned(kConfigRole));
  EXPECT_EQ(role_from_name("state"), unsigned(kStateRole));
  EXPECT_THROW(role_from_name("wibble"), ModelError);
}

TEST(TransitionSystemTest, AluShape)
{
  TransitionSystem ts = test::make_alu();
  EXPECT_EQ(ts.vars().size(), 3u);
  EXPECT_EQ(ts.input_vars(), std::vector<Variable>{ ts.var("a") });
  EXPECT_EQ(ts.output_vars(), std::vector<Variable>{ ts.var("x") });
  EXPECT_EQ(ts.config_vars(), std::vector<Variable>{ ts.var("cfg") });
}

TEST(TransitionSystemTest, PrimeHelpers)
{
  Variable x{ "x", Sort::bitvec(8) };
  EXPECT_EQ(TransitionSystem::prime(x).name, "x'");
  EXPECT_TRUE(TransitionSystem::is_primed_name("x'"));
  EXPECT_FALSE(TransitionSystem::is_primed_name("x"));
  EXPECT_EQ(TransitionSystem::unprime_name("x'"), "x");
}

TEST(TransitionSystemTest, RejectsMalformedSystems)
{
  Sort bv8 = Sort::bitvec(8);
  Variable x{ "x", bv8 };
  Variable a{ "a", bv8 };
  Variable cfg{ "cfg", Sort::boolean() };
  Term init = mk_eq(mk_var(x), bv_const(0, 8));
  Term trans = mk_eq(mk_var("x'", bv8),
                     mk_ite(mk_var(cfg), mk_bvadd(mk_var(x), mk_var(a)),
                            mk_bvsub(mk_var(x), mk_var(a))));
  std::map<std::string, unsigned> roles{ { "x", kStateRole | kOutputRole },
                                         { "a", kInputRole },
                                         { "cfg", kConfigRole } };

  // duplicate variable
  EXPECT_THROW(TransitionSystem({ x, x, cfg }, init, trans, roles),
               ModelError);
  // roles referencing undeclared variable
  EXPECT_THROW(TransitionSystem({ x, cfg }, mk_eq(mk_var(x), bv_const(0, 8)),
                                mk_true(),
                                { { "x", kStateRole }, { "zz", kInputRole },
                                  { "cfg", kConfigRole } }),
               ModelError);
  // init mentions an input variable
  EXPECT_THROW(
      TransitionSystem({ x, a, cfg }, mk_eq(mk_var(a), bv_const(0, 8)),
                       trans, roles),
      ModelError);
  // init mentions a variable outside V
  EXPECT_THROW(
      TransitionSystem({ x, cfg },
                       mk_eq(mk_var("w", bv8), bv_const(0, 8)), mk_true(),
                       { { "x", kStateRole }, { "cfg", kConfigRole } }),
      ModelError);
  // primed input in trans
  EXPECT_THROW(
      TransitionSystem({ x, a, cfg }, init,
                       mk_eq(mk_var("a'", bv8), bv_const(0, 8)), roles),
      ModelError);
  // no config variable
  EXPECT_THROW(TransitionSystem({ x, a }, init, trans,
                                { { "x", kStateRole }, { "a", kInputRole } }),
               ModelError);
  // non-Bool init
  EXPECT_THROW(TransitionSystem({ x, a, cfg }, bv_const(0, 8), trans, roles),
               SortError);
  // '@' in a variable name
  EXPECT_THROW(
      TransitionSystem({ Variable{ "x@0", bv8 }, cfg }, mk_true(), mk_true(),
                       { { "x@0", kStateRole }, { "cfg", kConfigRole } }),
      ModelError);
}

TEST(NextFunctionsTest, ExtractsEquations)
{
  TransitionSystem ts = test::make_alu();
  auto nf = next_functions(ts);
  ASSERT_EQ(nf.size(), 1u);
  const Variable x = ts.var("x");
  ASSERT_TRUE(nf.count(x));
  EXPECT_EQ(free_vars(nf.at(x)),
            (std::set<Variable>{ ts.var("cfg"), x, ts.var("a") }));
}

TEST(NextFunctionsTest, RejectsNonFunctional)
{
  Sort bv8 = Sort::bitvec(8);
  Variable x{ "x", bv8 };
  Variable cfg{ "cfg", Sort::boolean() };
  std::map<std::string, unsigned> roles{ { "x", kStateRole },
                                         { "cfg", kConfigRole } };
  Term init = mk_eq(mk_var(x), bv_const(0, 8));

  // relational constraint, not v' = f(V)
  TransitionSystem rel({ x, cfg }, init,
                       mk_bvult(mk_var("x'", bv8), bv_const(10, 8)), roles);
  EXPECT_THROW(next_functions(rel), ModelError);

  // two equations for the same primed variable
  Term eq1 = mk_eq(mk_var("x'", bv8), bv_const(1, 8));
  Term eq2 = mk_eq(mk_var("x'", bv8), bv_const(2, 8));
  TransitionSystem dup({ x, cfg }, init, mk_and(eq1, eq2), roles);
  EXPECT_THROW(next_functions(dup), ModelError);
}

// [PAPER] Example 1: from x=0 with inputs a=1,1 under cfg=true the run is
// x = 0, 1, 2.
TEST(SimulateTest, AluAddMode)
{
  TransitionSystem ts = test::make_alu();
  Assignment init;
  init.set_bv(ts.var("x"), 0);
  Assignment config;
  config.set_bool(ts.var("cfg"), true);

  auto states = simulate(ts, init, { bv_inputs(1), bv_inputs(1) }, config);
  ASSERT_EQ(states.size(), 3u);
  EXPECT_EQ(states[0].get(ts.var("x")).v, 0u);
  EXPECT_EQ(states[1].get(ts.var("x")).v, 1u);
  EXPECT_EQ(states[2].get(ts.var("x")).v, 2u);
  // inputs present on s_0..s_{k-1} only
  EXPECT_TRUE(states[0].contains("a"));
  EXPECT_TRUE(states[1].contains("a"));
  EXPECT_FALSE(states[2].contains("a"));
  // config constant throughout
  for (const auto & s : states) EXPECT_TRUE(s.get(ts.var("cfg")).as_bool());
}

// [DERIVED] same run under cfg=false: subtraction wraps at width 8,
// giving x = 0, 255, 254.
TEST(SimulateTest, AluSubMode)
{
  TransitionSystem ts = test::make_alu();
  Assignment init;
  init.set_bv(ts.var("x"), 0);
  Assignment config;
  config.set_bool(ts.var("cfg"), false);

  auto states = simulate(ts, init, { bv_inputs(1), bv_inputs(1) }, config);
  ASSERT_EQ(states.size(), 3u);
  EXPECT_EQ(states[0].get(ts.var("x")).v, 0u);
  EXPECT_EQ(states[1].get(ts.var("x")).v, 255u);
  EXPECT_EQ(states[2].get(ts.var("x")).v, 254u);
}

TEST(SimulateTest, EmptyInputsYieldsInitialStateOnly)
{
  TransitionSystem ts = test::make_alu();
  Assignment init;
  init.set_bv(ts.var("x"), 0);
  Assignment config;
  config.set_bool(ts.var("cfg"), true);
  auto states = simulate(ts, init, {}, config);
  ASSERT_EQ(states.size(), 1u);
  EXPECT_EQ(states[0].get(ts.var("x")).v, 0u);
}

TEST(SimulateTest, InitViolationRejected)
{
  TransitionSystem ts = test::make_alu();
  Assignment init;
  init.set_bv(ts.var("x"), 7);  // init requires x = 0
  Assignment config;
  config.set_bool(ts.var("cfg"), true);
  EXPECT_THROW(simulate(ts, init, {}, config), ModelError);
}

TEST(SimulateTest, MissingBindingsRejected)
{
  TransitionSystem ts = test::make_alu();
  Assignment config;
  config.set_bool(ts.var("cfg"), true);
  // x unbound in the initial state
  EXPECT_THROW(simulate(ts, {}, {}, config), UnboundVariableError);
  // input step missing variable a
  Assignment init;
  init.set_bv(ts.var("x"), 0);
  EXPECT_THROW(simulate(ts, init, { Assignment{} }, config),
               UnboundVariableError);
  // config variable unbound
  EXPECT_THROW(simulate(ts, init, {}, {}), UnboundVariableError);
}

// Executability: every adjacent state pair of a simulated run satisfies
// the transition relation (evaluated over s_i ∪ primed(s_{i+1})).
TEST(PropertyTest, SimulatedRunsSatisfyTrans)
{
  TransitionSystem ts = test::make_alu();
  std::mt19937 rng(11);
  for (int iter = 0; iter < 50; ++iter) {
    Assignment init;
    init.set_bv(ts.var("x"), rng() % 256);
    bool mode = rng() % 2;
    Assignment config;
    config.set_bool(ts.var("cfg"), mode);
    // make init consistent with I: I requires x = 0
    init.set_bv(ts.var("x"), 0);

    size_t k = rng() % 6;
    std::vector<Assignment> inputs;
    for (size_t i = 0; i < k; ++i) inputs.push_back(bv_inputs(rng() % 256));

    auto states = simulate(ts, init, inputs, config);
    ASSERT_EQ(states.size(), k + 1);
    for (size_t i = 0; i < k; ++i) {
      Assignment both = states[i];
      for (const auto & [name, val] : states[i + 1]) {
        if (!TransitionSystem::is_primed_name(name)) {
          both.set(Variable{ name + "'", val.sort }, val);
        }
      }
      EXPECT_TRUE(evaluate_bool(ts.trans(), both));
    }
  }
}
