#include "cfgsmith/frontend.h"

#include <gtest/gtest.h>

#include <random>

#include "cfgsmith/eval.h"
#include "cfgsmith/smtlib.h"
#include "testutil.h"

using namespace cfgsmith;

namespace {

const char * kAluDoc = R"(
; simple ALU, width 8
sorts
  bv8 = (_ BitVec 8)
vars
  x   : bv8  : state output
  a   : bv8  : input
  cfg : Bool : config
init
  (= x #x00)
trans
  (= x' (ite cfg (bvadd x a) (bvsub x a)))
)";

}  // namespace

TEST(SmtlibTest, TermParsing)
{
  std::map<std::string, Variable> sym{
    { "x", { "x", Sort::bitvec(8) } },
    { "b", { "b", Sort::boolean() } },
  };
  Variable x = sym.at("x"), b = sym.at("b");

  EXPECT_EQ(smtlib::parse_term("true", sym), mk_true());
  EXPECT_EQ(smtlib::parse_term("#x0f", sym), bv_const(15, 8));
  EXPECT_EQ(smtlib::parse_term("#b101", sym), bv_const(5, 3));
  EXPECT_EQ(smtlib::parse_term("(_ bv7 4)", sym), bv_const(7, 4));
  EXPECT_EQ(smtlib::parse_term("(bvadd x x)", sym),
            mk_bvadd(mk_var(x), mk_var(x)));
  EXPECT_EQ(smtlib::parse_term("((_ extract 3 0) x)", sym),
            mk_extract(mk_var(x), 3, 0));
  EXPECT_EQ(smtlib::parse_term("(and b b b)", sym),
            mk_and(mk_and(mk_var(b), mk_var(b)), mk_var(b)));
  EXPECT_EQ(smtlib::parse_term("(=> b b b)", sym),
            mk_implies(mk_var(b), mk_implies(mk_var(b), mk_var(b))));
}

TEST(SmtlibTest, Errors)
{
  std::map<std::string, Variable> sym;
  EXPECT_THROW(smtlib::parse_term("(bvadd", sym), ParseError);
  EXPECT_THROW(smtlib::parse_term("zork", sym), ParseError);
  EXPECT_THROW(smtlib::parse_term("(zork true)", sym), ParseError);
  EXPECT_THROW(smtlib::parse_term("true false", sym), ParseError);
  EXPECT_THROW(smtlib::parse_term("(bvadd #x01 #b1)", sym), SortError);
  try {
    smtlib::parse_term("\n  nope", sym);
    FAIL();
  } catch (const ParseError & e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_EQ(e.col(), 3u);
  }
}

TEST(ParseStsTest, AluDocument)
{
  TransitionSystem ts = parse_sts(kAluDoc);
  TransitionSystem ref = test::make_alu();
  EXPECT_EQ(ts.init(), ref.init());
  EXPECT_EQ(ts.trans(), ref.trans());
  EXPECT_EQ(ts.roles(), ref.roles());
  ASSERT_EQ(ts.vars().size(), 3u);
  EXPECT_EQ(ts.vars()[0].name, "x");  // document order kept
}

TEST(ParseStsTest, RoleOnUndeclaredVariable)
{
  // cfg never declared in vars: its appearance in trans is the error.
  const char * doc = R"(
vars
  x : (_ BitVec 8) : state
init
  (= x #x00)
trans
  (= x' (ite cfg (bvadd x #x01) x))
)";
  EXPECT_THROW(parse_sts(doc), ParseError);
}

TEST(ParseStsTest, InputInInitRejected)
{
  const char * doc = R"(
vars
  x   : (_ BitVec 8) : state
  a   : (_ BitVec 8) : input
  cfg : Bool : config
init
  (= a #x00)
trans
  (= x' x)
)";
  try {
    parse_sts(doc);
    FAIL() << "expected ModelError";
  } catch (const ModelError & e) {
    EXPECT_NE(std::string(e.what()).find("input"), std::string::npos);
  }
}

TEST(ParseStsTest, MalformedDocuments)
{
  EXPECT_THROW(parse_sts(""), ParseError);
  EXPECT_THROW(parse_sts("vars\n  x : (_ BitVec 8) : state\n"), ParseError);
  // init before vars
  EXPECT_THROW(parse_sts("init true\nvars\n  c : Bool : config\n"),
               ParseError);
  // primed variable in init
  EXPECT_THROW(parse_sts("vars\n  c : Bool : config\ninit (= c' c)\n"
                         "trans true\n"),
               ParseError);
  // reserved word as variable name
  EXPECT_THROW(parse_sts("vars\n  state : Bool : config\ninit true\n"
                         "trans true\n"),
               ParseError);
}

TEST(ParseStsTest, MultipleConjunctsPerSection)
{
  const char * doc = R"(
vars
  x : (_ BitVec 4) : state
  c : Bool : config
init
  (= x #x0)
  c
trans
  (= x' x)
)";
  TransitionSystem ts = parse_sts(doc);
  Variable x{ "x", Sort::bitvec(4) }, c{ "c", Sort::boolean() };
  EXPECT_EQ(ts.init(), mk_and(mk_eq(mk_var(x), bv_const(0, 4)), mk_var(c)));
}

TEST(PrintStsTest, RoundTripAlu)
{
  TransitionSystem ts = test::make_alu();
  std::string doc = print_sts(ts);
  TransitionSystem back = parse_sts(doc);
  EXPECT_EQ(back.init(), ts.init());
  EXPECT_EQ(back.trans(), ts.trans());
  EXPECT_EQ(back.roles(), ts.roles());
  EXPECT_EQ(back.vars(), ts.vars());
}

// Round-trip on randomized systems: random functional updates over a
// small variable pool.
TEST(PrintStsTest, RoundTripRandomSystems)
{
  std::mt19937 rng(5);
  for (int iter = 0; iter < 40; ++iter) {
    std::vector<Variable> pool{ { "u", Sort::bitvec(1 + rng() % 8) },
                                { "v", Sort::bitvec(1 + rng() % 8) },
                                { "w", Sort::boolean() } };
    Term init = mk_and(test::random_term(rng, { pool[0], pool[2] },
                                         Sort::boolean(), 3),
                       mk_true());
    std::vector<Term> tr;
    for (const Variable & var : pool) {
      tr.push_back(mk_eq(mk_var(TransitionSystem::prime(var)),
                         test::random_term(rng, pool, var.sort, 3)));
    }
    TransitionSystem ts(pool, init, mk_and_all(tr),
                        { { "u", kStateRole },
                          { "v", kStateRole | kOutputRole },
                          { "w", kConfigRole } });
    TransitionSystem back = parse_sts(print_sts(ts));
    EXPECT_EQ(back.init(), ts.init());
    EXPECT_EQ(back.trans(), ts.trans());
    EXPECT_EQ(back.roles(), ts.roles());
    EXPECT_EQ(back.vars(), ts.vars());
  }
}

TEST(TraceTest, Example1P1)
{
  const char * text = R"({
    "inputs":  [{"a": 1}, {"a": 1}],
    "outputs": [{"x": 0}, {"x": 1}, {"x": 2}]
  })";
  TransitionSystem ts = test::make_alu();
  Trace tr = parse_trace(text, ts);
  EXPECT_EQ(tr.k(), 2u);
  EXPECT_EQ(tr.inputs[0].values.at("a"), std::optional<uint64_t>(1));
  EXPECT_EQ(tr.outputs[2].values.at("x"), std::optional<uint64_t>(2));
}

TEST(TraceTest, DontCareAndErrors)
{
  TransitionSystem ts = test::make_alu();

  Trace dc = parse_trace(R"({"inputs": [{"a": 1}],
                             "outputs": [{"x": 0}, {"x": null}]})",
                         ts);
  EXPECT_FALSE(dc.outputs[1].values.at("x").has_value());

  // overflow: 256 does not fit width 8
  EXPECT_THROW(parse_trace(R"({"inputs": [{"a": 1}],
                               "outputs": [{"x": 0}, {"x": 256}]})",
                           ts),
               ModelError);
  // unknown variable
  EXPECT_THROW(parse_trace(R"({"inputs": [{"q": 1}],
                               "outputs": [{"x": 0}, {"x": 1}]})",
                           ts),
               ModelError);
  // role mismatch: x is not an input
  EXPECT_THROW(parse_trace(R"({"inputs": [{"x": 1}],
                               "outputs": [{"x": 0}, {"x": 1}]})",
                           ts),
               ModelError);
  // length mismatch
  EXPECT_THROW(parse_trace(R"({"inputs": [{"a": 1}], "outputs": [{"x": 0}]})",
                           ts),
               ParseError);
  // negative value
  EXPECT_THROW(parse_trace(R"({"inputs": [{"a": -1}],
                               "outputs": [{"x": 0}, {"x": 1}]})",
                           ts),
               ParseError);
  EXPECT_THROW(parse_trace("nonsense", ts), ParseError);
}

TEST(TraceTest, PrintParseRoundTrip)
{
  Trace tr;
  tr.inputs.push_back({ { { "a", 1 } } });
  tr.inputs.push_back({ { { "a", 255 } } });
  tr.outputs.push_back({ { { "x", 0 } } });
  tr.outputs.push_back({ { { "x", std::nullopt } } });
  tr.outputs.push_back({ { { "x", 2 } } });
  Trace back = parse_trace(print_trace(tr));
  EXPECT_EQ(back.inputs.size(), tr.inputs.size());
  for (size_t i = 0; i < tr.inputs.size(); ++i) {
    EXPECT_EQ(back.inputs[i].values, tr.inputs[i].values);
  }
  for (size_t i = 0; i < tr.outputs.size(); ++i) {
    EXPECT_EQ(back.outputs[i].values, tr.outputs[i].values);
  }
}

TEST(RoleMapTest, Parsing)
{
  auto rm = parse_role_map(R"({"x": ["state", "output"], "c": ["config"]})");
  EXPECT_EQ(rm.at("x"), unsigned(kStateRole | kOutputRole));
  EXPECT_EQ(rm.at("c"), unsigned(kConfigRole));
  EXPECT_THROW(parse_role_map(R"({"x": ["wibble"]})"), ModelError);
  EXPECT_THROW(parse_role_map(R"([1,2])"), ParseError);
}

namespace {

// x' = x + a with an extra config state c; matches the native kAluDoc
// flavor minus the cfg mux.
const char * kBtorCounter = R"(
1 sort bitvec 8
2 input 1 a
3 state 1 x
4 zero 1
5 init 1 3 4
6 add 1 3 2
7 next 1 3 6
8 sort bitvec 1
9 state 8 c
10 output 3
)";

const std::map<std::string, unsigned> kBtorRoles{
  { "x", kStateRole | kOutputRole },
  { "c", kConfigRole },
};

}  // namespace

TEST(Btor2Test, CounterModel)
{
  TransitionSystem ts = parse_btor2(kBtorCounter, kBtorRoles);
  Variable x{ "x", Sort::bitvec(8) }, a{ "a", Sort::bitvec(8) };
  EXPECT_EQ(ts.init(), mk_eq(mk_var(x), bv_const(0, 8)));
  EXPECT_EQ(ts.trans(), mk_eq(mk_var(TransitionSystem::prime(x)),
                              mk_bvadd(mk_var(x), mk_var(a))));
  EXPECT_EQ(ts.roles_of("a"), unsigned(kInputRole));
  EXPECT_EQ(ts.roles_of("x"), unsigned(kStateRole | kOutputRole));
  EXPECT_EQ(ts.roles_of("c"), unsigned(kConfigRole));
}

TEST(Btor2Test, StateWithoutNextIsUnconstrained)
{
  // c has no next line: no conjunct mentions c'.
  TransitionSystem ts = parse_btor2(kBtorCounter, kBtorRoles);
  for (const Term & conj : conjuncts(ts.trans())) {
    for (const Variable & v : free_vars(conj)) {
      EXPECT_NE(v.name, "c'");
    }
  }
}

TEST(Btor2Test, Operators)
{
  const char * doc = R"(
1 sort bitvec 4
2 sort bitvec 1
3 state 1 x
4 state 2 c
5 constd 1 10
6 ult 2 3 5
7 not 2 6
8 and 2 6 7
9 slice 2 3 3 3
10 uext 1 9 3
11 ite 1 6 3 10
12 next 1 3 11
13 sort bitvec 8
14 concat 13 3 10
)";
  TransitionSystem ts =
      parse_btor2(doc, { { "x", kStateRole }, { "c", kConfigRole } });
  // spot-check by evaluation: x = 12 -> ult false -> ite else-branch =
  // uext(slice(x,3,3)) = 0b0001
  auto nf = next_functions(ts);
  Assignment s;
  s.set_bv(Variable{ "x", Sort::bitvec(4) }, 12);
  EXPECT_EQ(evaluate(nf.at(Variable{ "x", Sort::bitvec(4) }), s).v, 1u);
  s.set_bv(Variable{ "x", Sort::bitvec(4) }, 3);  // 3 < 10: keep x
  EXPECT_EQ(evaluate(nf.at(Variable{ "x", Sort::bitvec(4) }), s).v, 3u);
}

TEST(Btor2Test, Errors)
{
  // dangling node id in next
  EXPECT_THROW(parse_btor2("1 sort bitvec 8\n2 state 1 x\n3 next 1 2 9\n",
                           { { "x", kStateRole } }),
               ParseError);
  // unsupported keyword
  try {
    parse_btor2("1 sort bitvec 8\n2 state 1 x\n3 sll 1 2 2\n",
                { { "x", kStateRole } });
    FAIL();
  } catch (const ParseError & e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_NE(std::string(e.what()).find("sll"), std::string::npos);
  }
  // width mismatch: add of bv8 declared as bv4
  EXPECT_THROW(
      parse_btor2("1 sort bitvec 8\n2 sort bitvec 4\n3 state 1 x\n"
                  "4 add 2 3 3\n",
                  { { "x", kStateRole } }),
      ParseError);
  // sidecar names unknown variable
  EXPECT_THROW(parse_btor2("1 sort bitvec 8\n2 state 1 x\n",
                           { { "zz", kConfigRole } }),
               ModelError);
  // output role stripped by the sidecar
  EXPECT_THROW(parse_btor2("1 sort bitvec 1\n2 state 1 x\n3 output 2\n",
                           { { "x", kConfigRole } }),
               ModelError);
}

// The native and btor2 parsers agree: parse the counter both ways and
// check transition equivalence by exhaustive evaluation at width 4.
TEST(Btor2Test, AgreesWithNativeParser)
{
  const char * btor = R"(
1 sort bitvec 4
2 input 1 a
3 state 1 x
4 zero 1
5 init 1 3 4
6 add 1 3 2
7 next 1 3 6
8 sort bitvec 1
9 state 8 c
)";
  const char * native = R"(
vars
  a : (_ BitVec 4) : input
  x : (_ BitVec 4) : state
  c : (_ BitVec 1) : config
init
  (= x (_ bv0 4))
trans
  (= x' (bvadd x a))
)";
  TransitionSystem bt = parse_btor2(
      btor, { { "x", kStateRole }, { "c", kConfigRole } });
  TransitionSystem nt = parse_sts(native);
  Variable x{ "x", Sort::bitvec(4) }, a{ "a", Sort::bitvec(4) };
  Variable xp = TransitionSystem::prime(x);
  for (uint64_t xv = 0; xv < 16; ++xv) {
    for (uint64_t av = 0; av < 16; ++av) {
      for (uint64_t xpv : { (xv + av) & 0xf, (xv + av + 1) & 0xf }) {
        Assignment s;
        s.set_bv(x, xv);
        s.set_bv(a, av);
        s.set_bv(xp, xpv);
        s.set_bv(Variable{ "c", Sort::bitvec(1) }, 0);
        EXPECT_EQ(evaluate_bool(bt.trans(), s),
                  evaluate_bool(nt.trans(), s));
      }
    }
  }
}
