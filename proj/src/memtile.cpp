#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "cfgsmith/errors.h"
#include "cfgsmith/memtile.h"

namespace cfgsmith {

namespace {

unsigned ceil_log2(uint64_t n)
{
  unsigned b = 0;
  while (b < 63 && (uint64_t{ 1 } << b) < n) ++b;
  return b;
}

uint64_t width_mask(unsigned width)
{
  return width >= 64 ? ~uint64_t{ 0 } : (uint64_t{ 1 } << width) - 1;
}

// t << b at t's width, written with concat/extract so bit-blasting
// never sees a multiplier.
Term shl_const(const Term & t, unsigned b)
{
  unsigned w = t.sort().width();
  if (b == 0) return t;
  if (b >= w) return bv_const(0, w);
  return mk_concat(mk_extract(t, w - 1 - b, 0), bv_const(0, b));
}

// counter * stride by shift-and-add over the (narrow) counter bits.
Term mul_by_counter(const Term & counter, const Term & stride)
{
  unsigned vw = stride.sort().width();
  Term sum = bv_const(0, vw);
  for (unsigned b = 0; b < counter.sort().width() && b < vw; ++b) {
    Term bit = mk_eq(mk_extract(counter, b, b), bv_const(1, 1));
    sum = mk_bvadd(sum, mk_ite(bit, shl_const(stride, b), bv_const(0, vw)));
  }
  return sum;
}

Term affine_value(const GeneratorFragment & g,
                  const std::vector<Term> & counters)
{
  Term v = mk_var(g.offset);
  for (size_t j = 0; j < counters.size(); ++j) {
    v = mk_bvadd(v, mul_by_counter(counters[j], mk_var(g.strides[j])));
  }
  return v;
}

unsigned dim_width(unsigned maxdim)
{
  return std::max(1u, ceil_log2(uint64_t{ maxdim } + 1));
}

}  // namespace

std::vector<uint64_t> affine_sequence(const AffineConfig & cfg,
                                      unsigned value_width)
{
  if (value_width == 0 || value_width > 64) {
    throw ModelError("affine_sequence needs a value width in 1..64");
  }
  if (cfg.dim == 0) {
    throw ModelError("affine_sequence needs at least one active dimension");
  }
  if (cfg.dim > cfg.ranges.size() || cfg.dim > cfg.strides.size()) {
    throw ModelError("affine config dim exceeds its field vectors");
  }
  uint64_t total = 1;
  for (unsigned j = 0; j < cfg.dim; ++j) {
    if (cfg.ranges[j] == 0) {
      throw ModelError("affine config has a zero active range");
    }
    total *= cfg.ranges[j];
  }
  uint64_t mask = width_mask(value_width);
  std::vector<uint64_t> out;
  out.reserve(total);
  std::vector<uint64_t> c(cfg.dim, 0);
  for (uint64_t i = 0; i < total; ++i) {
    uint64_t v = cfg.offset;
    for (unsigned j = 0; j < cfg.dim; ++j) v += c[j] * cfg.strides[j];
    out.push_back(v & mask);
    for (unsigned j = 0; j < cfg.dim; ++j) {
      if (++c[j] < cfg.ranges[j]) break;
      c[j] = 0;
    }
  }
  return out;
}

std::vector<Variable> GeneratorFragment::config_vars() const
{
  std::vector<Variable> out{ dim };
  out.insert(out.end(), ranges.begin(), ranges.end());
  out.insert(out.end(), strides.begin(), strides.end());
  out.push_back(offset);
  return out;
}

std::vector<Variable> GeneratorFragment::state_vars() const
{
  std::vector<Variable> out = counters;
  if (fire) out.push_back(*fire);
  return out;
}

GeneratorFragment build_affine_generator(const GeneratorBinding & binding,
                                         const GeneratorParams & params)
{
  if (params.maxdim == 0) {
    throw ModelError("generator needs at least one dimension");
  }
  if (params.range_width == 0 || params.range_width > 64
      || params.value_width == 0 || params.value_width > 64) {
    throw ModelError("generator field widths must lie in 1..64");
  }
  GeneratorFragment g;
  g.binding = binding;
  g.params = params;
  const std::string & n = binding.name;
  g.dim = Variable{ n + "_dim", Sort::bitvec(dim_width(params.maxdim)) };
  for (unsigned j = 0; j < params.maxdim; ++j) {
    std::string sj = std::to_string(j);
    g.ranges.push_back({ n + "_r" + sj, Sort::bitvec(params.range_width) });
    g.strides.push_back({ n + "_s" + sj, Sort::bitvec(params.value_width) });
    g.counters.push_back({ n + "_c" + sj, Sort::bitvec(params.range_width) });
  }
  g.offset = Variable{ n + "_off", Sort::bitvec(params.value_width) };
  if (!binding.addressor) g.fire = Variable{ n + "_fire", Sort::boolean() };
  std::vector<Term> cs;
  for (const Variable & c : g.counters) cs.push_back(mk_var(c));
  g.value = affine_value(g, cs);
  return g;
}

std::vector<Term> generator_init(const GeneratorFragment & g)
{
  unsigned rw = g.params.range_width;
  unsigned dw = dim_width(g.params.maxdim);
  std::vector<Term> out;
  for (const Variable & c : g.counters) {
    out.push_back(mk_eq(mk_var(c), bv_const(0, rw)));
  }
  if (g.fire) out.push_back(mk_eq(mk_var(*g.fire), mk_false()));
  Term dim = mk_var(g.dim);
  out.push_back(mk_bvule(dim, bv_const(g.params.maxdim, dw)));
  for (unsigned j = 0; j < g.params.maxdim; ++j) {
    out.push_back(mk_implies(mk_bvult(bv_const(j, dw), dim),
                             mk_not(mk_eq(mk_var(g.ranges[j]),
                                          bv_const(0, rw)))));
  }
  return out;
}

GeneratorStep generator_step(const GeneratorFragment & g,
                             const Term & advance)
{
  unsigned rw = g.params.range_width;
  unsigned dw = dim_width(g.params.maxdim);
  Term dim = mk_var(g.dim);
  GeneratorStep step;
  Term carry = advance;
  for (unsigned j = 0; j < g.params.maxdim; ++j) {
    Term c = mk_var(g.counters[j]);
    Term active = mk_bvult(bv_const(j, dw), dim);
    Term bumped = mk_bvadd(c, bv_const(1, rw));
    Term at_end = mk_eq(bumped, mk_var(g.ranges[j]));
    Term stepped = mk_ite(at_end, bv_const(0, rw), bumped);
    step.counter_next.push_back(mk_ite(mk_and(active, carry), stepped,
                                       mk_ite(active, c, bv_const(0, rw))));
    carry = mk_and(carry, mk_and(active, at_end));
  }
  step.value_next = affine_value(g, step.counter_next);
  return step;
}

std::vector<Term> generator_trans(const GeneratorFragment & g,
                                  const GeneratorStep & step)
{
  std::vector<Term> out;
  for (size_t j = 0; j < g.counters.size(); ++j) {
    out.push_back(mk_eq(mk_var(TransitionSystem::prime(g.counters[j])),
                        step.counter_next[j]));
  }
  return out;
}

std::vector<Term> pairing_constraints(const GeneratorFragment & accessor,
                                      const GeneratorFragment & addressor)
{
  if (accessor.params.maxdim != addressor.params.maxdim
      || accessor.params.range_width != addressor.params.range_width) {
    throw ModelError("paired generators must share maxdim and range width");
  }
  unsigned dw = dim_width(accessor.params.maxdim);
  Term dim = mk_var(accessor.dim);
  std::vector<Term> out;
  out.push_back(mk_eq(dim, mk_var(addressor.dim)));
  for (unsigned j = 0; j < accessor.params.maxdim; ++j) {
    out.push_back(mk_implies(mk_bvult(bv_const(j, dw), dim),
                             mk_eq(mk_var(accessor.ranges[j]),
                                   mk_var(addressor.ranges[j]))));
  }
  return out;
}

TransitionSystem build_affine_generator_sts(const GeneratorBinding & binding,
                                            const GeneratorParams & params)
{
  GeneratorFragment g = build_affine_generator(binding, params);
  unsigned vw = params.value_width;
  Variable val{ binding.name + "_val", Sort::bitvec(vw) };

  std::vector<Variable> vars;
  std::map<std::string, unsigned> roles;
  auto add = [&](const Variable & v, unsigned role) {
    vars.push_back(v);
    roles[v.name] = role;
  };
  for (const Variable & v : g.config_vars()) add(v, kConfigRole);
  for (const Variable & v : g.counters) add(v, kStateRole);

  std::vector<Term> init = generator_init(g);
  init.push_back(mk_eq(mk_var(val), mk_var(g.offset)));

  std::vector<Term> trans;
  Term advance = mk_true();
  if (!binding.addressor) {
    Variable cycle{ binding.name + "_cycle", Sort::bitvec(vw) };
    add(cycle, kStateRole);
    add(*g.fire, kStateRole | kOutputRole);
    init.push_back(mk_eq(mk_var(cycle), bv_const(0, vw)));
    advance = mk_eq(mk_var(cycle), g.value);
    trans.push_back(mk_eq(mk_var(TransitionSystem::prime(cycle)),
                          mk_bvadd(mk_var(cycle), bv_const(1, vw))));
    trans.push_back(mk_eq(mk_var(TransitionSystem::prime(*g.fire)), advance));
  }
  add(val, kStateRole | kOutputRole);

  GeneratorStep step = generator_step(g, advance);
  for (const Term & t : generator_trans(g, step)) trans.push_back(t);
  trans.push_back(mk_eq(mk_var(TransitionSystem::prime(val)),
                        step.value_next));

  return TransitionSystem(vars, mk_and_all(init), mk_and_all(trans), roles);
}

GeneratorGroup generator_group(const GeneratorFragment & g)
{
  GeneratorGroup grp;
  grp.name = g.binding.name;
  grp.write = g.binding.write;
  grp.addressor = g.binding.addressor;
  grp.dim = g.dim;
  grp.ranges = g.ranges;
  grp.strides = g.strides;
  grp.offset = g.offset;
  return grp;
}

namespace {

// Accumulates one system's pieces while the tile is assembled.
struct SysBuild
{
  std::vector<Variable> vars;
  std::map<std::string, unsigned> roles;
  std::vector<Term> init;
  std::vector<Term> trans;

  void add(const Variable & v, unsigned role)
  {
    vars.push_back(v);
    roles[v.name] = role;
  }

  void add_gen(const GeneratorFragment & g)
  {
    for (const Variable & v : g.config_vars()) add(v, kConfigRole);
    for (const Variable & v : g.counters) add(v, kStateRole);
    if (g.fire) add(*g.fire, kStateRole | kOutputRole);
  }

  void add_terms(std::vector<Term> & dst, const std::vector<Term> & src)
  {
    dst.insert(dst.end(), src.begin(), src.end());
  }

  TransitionSystem build() const
  {
    return TransitionSystem(vars, mk_and_all(init), mk_and_all(trans), roles);
  }
};

}  // namespace

const GeneratorFragment & MiniTile::generator(const std::string & name) const
{
  for (const GeneratorFragment & g : generators) {
    if (g.binding.name == name) return g;
  }
  throw ModelError("tile has no generator named '" + name + "'");
}

MiniTile build_mini_tile(const MiniTileParams & params)
{
  unsigned word = params.word_width;
  unsigned ratio = params.pack_ratio;
  unsigned depth = params.sram_depth;
  unsigned cw = params.counter_width;
  if (word == 0 || ratio < 2 || depth == 0 || params.maxdim == 0) {
    throw ModelError("mini tile parameters out of range");
  }
  if (uint64_t{ word } * ratio > 64) {
    throw ModelError("packed line exceeds 64 bits");
  }
  if (cw == 0 || cw > 64) {
    throw ModelError("counter width must lie in 1..64");
  }
  unsigned line_w = word * ratio;
  unsigned slot_aw = std::max(1u, ceil_log2(ratio));
  unsigned line_aw = std::max(1u, ceil_log2(depth));

  GeneratorParams acc_p{ params.maxdim, 4, cw };
  GeneratorParams slot_p{ params.maxdim, 4, slot_aw };
  GeneratorParams line_p{ params.maxdim, 4, line_aw };

  using Stage = GeneratorBinding::Stage;
  GeneratorFragment aw_acc = build_affine_generator(
      { "aw_acc", false, true, Stage::kAgg, false }, acc_p);
  GeneratorFragment aw_addr = build_affine_generator(
      { "aw_addr", true, true, Stage::kAgg, false }, slot_p);
  GeneratorFragment ar_acc = build_affine_generator(
      { "ar_acc", false, true, Stage::kAgg, true }, acc_p);
  GeneratorFragment sw_addr = build_affine_generator(
      { "sw_addr", true, true, Stage::kSram, false }, line_p);
  GeneratorFragment sr_acc = build_affine_generator(
      { "sr_acc", false, false, Stage::kSram, true }, acc_p);
  GeneratorFragment sr_addr = build_affine_generator(
      { "sr_addr", true, false, Stage::kSram, false }, line_p);
  GeneratorFragment tr_acc = build_affine_generator(
      { "tr_acc", false, false, Stage::kTb, false }, acc_p);
  GeneratorFragment tr_addr = build_affine_generator(
      { "tr_addr", true, false, Stage::kTb, false }, slot_p);

  Variable in{ "in", Sort::bitvec(word) };
  Variable out{ "out", Sort::bitvec(word) };
  Variable cycle{ "cycle", Sort::bitvec(cw) };
  std::vector<Variable> slots;
  for (unsigned j = 0; j < ratio; ++j) {
    slots.push_back({ "agg" + std::to_string(j), Sort::bitvec(word) });
  }
  Variable agg_bus{ "agg_bus", Sort::bitvec(line_w) };
  std::vector<Variable> lines;
  for (unsigned l = 0; l < depth; ++l) {
    lines.push_back({ "sram" + std::to_string(l), Sort::bitvec(line_w) });
  }
  Variable sram_bus{ "sram_bus", Sort::bitvec(line_w) };
  Variable tb{ "tb", Sort::bitvec(line_w) };

  Term cyc = mk_var(cycle);
  Term f_aw = mk_eq(cyc, aw_acc.value);
  Term f_ar = mk_eq(cyc, ar_acc.value);
  Term f_sr = mk_eq(cyc, sr_acc.value);
  Term f_tr = mk_eq(cyc, tr_acc.value);

  GeneratorStep s_aw_acc = generator_step(aw_acc, f_aw);
  GeneratorStep s_aw_addr = generator_step(aw_addr, f_aw);
  GeneratorStep s_ar_acc = generator_step(ar_acc, f_ar);
  GeneratorStep s_sw_addr = generator_step(sw_addr, f_ar);
  GeneratorStep s_sr_acc = generator_step(sr_acc, f_sr);
  GeneratorStep s_sr_addr = generator_step(sr_addr, f_sr);
  GeneratorStep s_tr_acc = generator_step(tr_acc, f_tr);
  GeneratorStep s_tr_addr = generator_step(tr_addr, f_tr);

  // word intake into the slots; the packed bus mirrors the new slots
  std::vector<Term> slot_next;
  for (unsigned j = 0; j < ratio; ++j) {
    Term hit = mk_and(f_aw, mk_eq(aw_addr.value, bv_const(j, slot_aw)));
    slot_next.push_back(mk_ite(hit, mk_var(in), mk_var(slots[j])));
  }
  Term bus_next = slot_next[ratio - 1];
  for (unsigned j = ratio - 1; j-- > 0;) {
    bus_next = mk_concat(bus_next, slot_next[j]);
  }

  // line writes take the bus as latched; the readout bus follows the
  // read addressor over the new line contents
  std::vector<Term> line_next;
  for (unsigned l = 0; l < depth; ++l) {
    Term hit = mk_and(f_ar, mk_eq(sw_addr.value, bv_const(l, line_aw)));
    line_next.push_back(mk_ite(hit, mk_var(agg_bus), mk_var(lines[l])));
  }
  Term rd_next = bv_const(0, line_w);
  for (unsigned l = 0; l < depth; ++l) {
    rd_next = mk_ite(mk_eq(s_sr_addr.value_next, bv_const(l, line_aw)),
                     line_next[l], rd_next);
  }

  Term tb_next = mk_ite(f_sr, mk_var(sram_bus), mk_var(tb));

  Term slice = bv_const(0, word);
  for (unsigned s = 0; s < ratio; ++s) {
    slice = mk_ite(mk_eq(tr_addr.value, bv_const(s, slot_aw)),
                   mk_extract(mk_var(tb), word * (s + 1) - 1, word * s),
                   slice);
  }
  Term out_next = mk_ite(f_tr, slice, mk_var(out));

  // init conjuncts
  Term i_cycle = mk_eq(cyc, bv_const(0, cw));
  Term i_out = mk_eq(mk_var(out), bv_const(0, word));
  std::vector<Term> i_slots;
  for (const Variable & v : slots) {
    i_slots.push_back(mk_eq(mk_var(v), bv_const(0, word)));
  }
  Term i_agg_bus = mk_eq(mk_var(agg_bus), bv_const(0, line_w));
  std::vector<Term> i_lines;
  for (const Variable & v : lines) {
    i_lines.push_back(mk_eq(mk_var(v), bv_const(0, line_w)));
  }
  Term i_sram_bus = mk_eq(mk_var(sram_bus), bv_const(0, line_w));
  Term i_tb = mk_eq(mk_var(tb), bv_const(0, line_w));

  std::vector<Term> gi_aw_acc = generator_init(aw_acc);
  std::vector<Term> gi_aw_addr = generator_init(aw_addr);
  std::vector<Term> gi_ar_acc = generator_init(ar_acc);
  std::vector<Term> gi_sw_addr = generator_init(sw_addr);
  std::vector<Term> gi_sr_acc = generator_init(sr_acc);
  std::vector<Term> gi_sr_addr = generator_init(sr_addr);
  std::vector<Term> gi_tr_acc = generator_init(tr_acc);
  std::vector<Term> gi_tr_addr = generator_init(tr_addr);

  std::vector<Term> pair_aw = pairing_constraints(aw_acc, aw_addr);
  std::vector<Term> pair_ar = pairing_constraints(ar_acc, sw_addr);
  std::vector<Term> pair_sr = pairing_constraints(sr_acc, sr_addr);
  std::vector<Term> pair_tr = pairing_constraints(tr_acc, tr_addr);

  // trans conjuncts
  auto next_eq = [](const Variable & v, const Term & rhs) {
    return mk_eq(mk_var(TransitionSystem::prime(v)), rhs);
  };
  Term t_cycle = next_eq(cycle, mk_bvadd(cyc, bv_const(1, cw)));
  std::vector<Term> t_slots;
  for (unsigned j = 0; j < ratio; ++j) {
    t_slots.push_back(next_eq(slots[j], slot_next[j]));
  }
  Term t_agg_bus = next_eq(agg_bus, bus_next);
  std::vector<Term> t_lines;
  for (unsigned l = 0; l < depth; ++l) {
    t_lines.push_back(next_eq(lines[l], line_next[l]));
  }
  Term t_sram_bus = next_eq(sram_bus, rd_next);
  Term t_tb = next_eq(tb, tb_next);
  Term t_out = next_eq(out, out_next);
  Term t_f_aw = next_eq(*aw_acc.fire, f_aw);
  Term t_f_ar = next_eq(*ar_acc.fire, f_ar);
  Term t_f_sr = next_eq(*sr_acc.fire, f_sr);
  Term t_f_tr = next_eq(*tr_acc.fire, f_tr);
  std::vector<Term> gt_aw_acc = generator_trans(aw_acc, s_aw_acc);
  std::vector<Term> gt_aw_addr = generator_trans(aw_addr, s_aw_addr);
  std::vector<Term> gt_ar_acc = generator_trans(ar_acc, s_ar_acc);
  std::vector<Term> gt_sw_addr = generator_trans(sw_addr, s_sw_addr);
  std::vector<Term> gt_sr_acc = generator_trans(sr_acc, s_sr_acc);
  std::vector<Term> gt_sr_addr = generator_trans(sr_addr, s_sr_addr);
  std::vector<Term> gt_tr_acc = generator_trans(tr_acc, s_tr_acc);
  std::vector<Term> gt_tr_addr = generator_trans(tr_addr, s_tr_addr);

  // AGG: word intake and packing
  SysBuild agg;
  agg.add(in, kInputRole);
  agg.add(cycle, kStateRole);
  for (const Variable & v : slots) agg.add(v, kStateRole);
  agg.add(agg_bus, kStateRole | kOutputRole);
  agg.add_gen(aw_acc);
  agg.add_gen(aw_addr);
  agg.add_gen(ar_acc);
  agg.init.push_back(i_cycle);
  agg.add_terms(agg.init, i_slots);
  agg.init.push_back(i_agg_bus);
  agg.add_terms(agg.init, gi_aw_acc);
  agg.add_terms(agg.init, gi_aw_addr);
  agg.add_terms(agg.init, gi_ar_acc);
  agg.add_terms(agg.init, pair_aw);
  agg.trans.push_back(t_cycle);
  agg.add_terms(agg.trans, t_slots);
  agg.trans.push_back(t_agg_bus);
  agg.trans.push_back(t_f_aw);
  agg.trans.push_back(t_f_ar);
  agg.add_terms(agg.trans, gt_aw_acc);
  agg.add_terms(agg.trans, gt_aw_addr);
  agg.add_terms(agg.trans, gt_ar_acc);

  // SRAM: line writes from the packed bus, readout onto sram_bus
  SysBuild sram;
  sram.add(cycle, kStateRole);
  sram.add(agg_bus, kStateRole | kOutputRole);
  for (const Variable & v : lines) sram.add(v, kStateRole);
  sram.add(sram_bus, kStateRole | kOutputRole);
  sram.add_gen(ar_acc);
  sram.add_gen(sw_addr);
  sram.add_gen(sr_acc);
  sram.add_gen(sr_addr);
  sram.init.push_back(i_cycle);
  sram.init.push_back(i_agg_bus);
  sram.add_terms(sram.init, i_lines);
  sram.init.push_back(i_sram_bus);
  sram.add_terms(sram.init, gi_ar_acc);
  sram.add_terms(sram.init, gi_sw_addr);
  sram.add_terms(sram.init, gi_sr_acc);
  sram.add_terms(sram.init, gi_sr_addr);
  sram.add_terms(sram.init, pair_ar);
  sram.add_terms(sram.init, pair_sr);
  sram.trans.push_back(t_cycle);
  sram.add_terms(sram.trans, t_lines);
  sram.trans.push_back(t_sram_bus);
  sram.trans.push_back(t_f_ar);
  sram.trans.push_back(t_f_sr);
  sram.add_terms(sram.trans, gt_ar_acc);
  sram.add_terms(sram.trans, gt_sw_addr);
  sram.add_terms(sram.trans, gt_sr_acc);
  sram.add_terms(sram.trans, gt_sr_addr);

  // TB: line capture and word emission
  SysBuild tbp;
  tbp.add(cycle, kStateRole);
  tbp.add(sram_bus, kStateRole | kOutputRole);
  tbp.add(tb, kStateRole);
  tbp.add(out, kStateRole | kOutputRole);
  tbp.add_gen(sr_acc);
  tbp.add_gen(tr_acc);
  tbp.add_gen(tr_addr);
  tbp.init.push_back(i_cycle);
  tbp.init.push_back(i_sram_bus);
  tbp.init.push_back(i_tb);
  tbp.init.push_back(i_out);
  tbp.add_terms(tbp.init, gi_sr_acc);
  tbp.add_terms(tbp.init, gi_tr_acc);
  tbp.add_terms(tbp.init, gi_tr_addr);
  tbp.add_terms(tbp.init, pair_tr);
  tbp.trans.push_back(t_cycle);
  tbp.trans.push_back(t_tb);
  tbp.trans.push_back(t_out);
  tbp.trans.push_back(t_f_sr);
  tbp.trans.push_back(t_f_tr);
  tbp.add_terms(tbp.trans, gt_sr_acc);
  tbp.add_terms(tbp.trans, gt_tr_acc);
  tbp.add_terms(tbp.trans, gt_tr_addr);

  // parent: the union, in a fixed order
  SysBuild par;
  par.add(in, kInputRole);
  par.add(out, kStateRole | kOutputRole);
  par.add(cycle, kStateRole);
  for (const Variable & v : slots) par.add(v, kStateRole);
  par.add(agg_bus, kStateRole | kOutputRole);
  for (const Variable & v : lines) par.add(v, kStateRole);
  par.add(sram_bus, kStateRole | kOutputRole);
  par.add(tb, kStateRole);
  par.add_gen(aw_acc);
  par.add_gen(aw_addr);
  par.add_gen(ar_acc);
  par.add_gen(sw_addr);
  par.add_gen(sr_acc);
  par.add_gen(sr_addr);
  par.add_gen(tr_acc);
  par.add_gen(tr_addr);
  par.init.push_back(i_cycle);
  par.init.push_back(i_out);
  par.add_terms(par.init, i_slots);
  par.init.push_back(i_agg_bus);
  par.add_terms(par.init, i_lines);
  par.init.push_back(i_sram_bus);
  par.init.push_back(i_tb);
  par.add_terms(par.init, gi_aw_acc);
  par.add_terms(par.init, gi_aw_addr);
  par.add_terms(par.init, gi_ar_acc);
  par.add_terms(par.init, gi_sw_addr);
  par.add_terms(par.init, gi_sr_acc);
  par.add_terms(par.init, gi_sr_addr);
  par.add_terms(par.init, gi_tr_acc);
  par.add_terms(par.init, gi_tr_addr);
  par.add_terms(par.init, pair_aw);
  par.add_terms(par.init, pair_ar);
  par.add_terms(par.init, pair_sr);
  par.add_terms(par.init, pair_tr);
  par.trans.push_back(t_cycle);
  par.add_terms(par.trans, t_slots);
  par.trans.push_back(t_agg_bus);
  par.add_terms(par.trans, t_lines);
  par.trans.push_back(t_sram_bus);
  par.trans.push_back(t_tb);
  par.trans.push_back(t_out);
  par.trans.push_back(t_f_aw);
  par.trans.push_back(t_f_ar);
  par.trans.push_back(t_f_sr);
  par.trans.push_back(t_f_tr);
  par.add_terms(par.trans, gt_aw_acc);
  par.add_terms(par.trans, gt_aw_addr);
  par.add_terms(par.trans, gt_ar_acc);
  par.add_terms(par.trans, gt_sw_addr);
  par.add_terms(par.trans, gt_sr_acc);
  par.add_terms(par.trans, gt_sr_addr);
  par.add_terms(par.trans, gt_tr_acc);
  par.add_terms(par.trans, gt_tr_addr);

  std::vector<GeneratorFragment> gens{ aw_acc,  aw_addr, ar_acc,  sw_addr,
                                       sr_acc,  sr_addr, tr_acc,  tr_addr };
  std::vector<GeneratorGroup> groups;
  for (const GeneratorFragment & g : gens) groups.push_back(generator_group(g));

  std::vector<std::string> shared{ "cycle", "agg_bus", "sram_bus" };
  for (const GeneratorFragment * g : { &ar_acc, &sr_acc }) {
    for (const Variable & v : g->config_vars()) shared.push_back(v.name);
    for (const Variable & v : g->state_vars()) shared.push_back(v.name);
  }

  return MiniTile{ params,
                   par.build(),
                   { { "agg", agg.build() },
                     { "sram", sram.build() },
                     { "tb", tbp.build() } },
                   std::move(shared),
                   std::move(gens),
                   std::move(groups) };
}

Trace gen_identity_trace(unsigned width, unsigned height, size_t latency)
{
  uint64_t n = uint64_t{ width } * height;
  if (n == 0) throw ModelError("identity trace needs a nonempty image");
  if (n > 255) throw ModelError("identity trace words must fit 8 bits");
  if (latency == 0) throw ModelError("identity trace needs a latency");
  size_t k = latency + n - 1;
  Trace t;
  t.inputs.resize(k);
  t.outputs.resize(k + 1);
  for (uint64_t i = 0; i < n; ++i) t.inputs[i].values["in"] = i + 1;
  for (uint64_t j = 0; j < n; ++j) {
    t.outputs[latency + j].values["out"] = j + 1;
  }
  return t;
}

Trace gen_conv3x3_trace(unsigned width, unsigned height, size_t latency)
{
  if (width < 3 || height < 3) {
    throw ModelError("conv3x3 needs at least a 3x3 image");
  }
  uint64_t n_in = uint64_t{ width } * height;
  if (n_in > 255) throw ModelError("conv3x3 trace words must fit 8 bits");
  if (latency == 0) throw ModelError("conv3x3 trace needs a latency");
  size_t wins = size_t{ width - 2 } * (height - 2);
  size_t n_out = 9 * wins;
  size_t k = latency + n_out - 1;
  if (n_in > k) throw ModelError("conv3x3 latency too small for the inputs");
  Trace t;
  t.inputs.resize(k);
  t.outputs.resize(k + 1);
  for (uint64_t i = 0; i < n_in; ++i) t.inputs[i].values["in"] = i + 1;
  size_t idx = 0;
  for (unsigned r = 0; r + 3 <= height; ++r) {
    for (unsigned c = 0; c + 3 <= width; ++c) {
      for (unsigned wr = 0; wr < 3; ++wr) {
        for (unsigned wc = 0; wc < 3; ++wc) {
          t.outputs[latency + idx].values["out"] =
              uint64_t{ r + wr } * width + (c + wc) + 1;
          ++idx;
        }
      }
    }
  }
  return t;
}

namespace {

// A fully scheduled run: fire cycles plus the address consumed at each
// fire, in firing order.
struct Schedule
{
  std::vector<uint64_t> aw_fires, aw_slots;
  std::vector<uint64_t> ar_fires, ar_lines;
  std::vector<uint64_t> sr_fires, sr_lines;
  std::vector<uint64_t> tr_fires, tr_slices;
};

std::map<uint64_t, size_t> fire_index(const std::vector<uint64_t> & fires,
                                      size_t k, const char * who)
{
  std::map<uint64_t, size_t> m;
  for (size_t i = 0; i < fires.size(); ++i) {
    if (i > 0 && fires[i] <= fires[i - 1]) {
      throw ModelError(std::string(who) + " fire cycles must increase");
    }
    if (fires[i] >= k) {
      throw ModelError(std::string(who) + " fires beyond the unrolled run");
    }
    m[fires[i]] = i;
  }
  return m;
}

// Replays the schedule through a concrete model of the datapath and
// derives the per-part traces: the parent's pins plus the full bus,
// output, and fire trajectories.
TilePlan plan_from_schedule(const MiniTile & tile, Trace parent,
                            const Schedule & s, size_t k)
{
  const MiniTileParams & p = tile.params;
  unsigned R = p.pack_ratio;
  uint64_t wmask = width_mask(p.word_width);
  if (k == 0 || uint64_t{ k } > width_mask(p.counter_width)) {
    throw ModelError("run length does not fit the cycle counter");
  }
  if (s.sr_fires.empty() || s.tr_fires.empty()) {
    throw ModelError("schedule never reads");
  }

  std::map<uint64_t, size_t> aw_at = fire_index(s.aw_fires, k, "aw");
  std::map<uint64_t, size_t> ar_at = fire_index(s.ar_fires, k, "ar");
  std::map<uint64_t, size_t> sr_at = fire_index(s.sr_fires, k, "sr");
  std::map<uint64_t, size_t> tr_at = fire_index(s.tr_fires, k, "tr");

  std::vector<uint64_t> slots(R, 0), lines(p.sram_depth, 0);
  uint64_t bus = 0, srbus = 0, tbreg = 0, outreg = 0;
  size_t sr_done = 0;

  std::vector<uint64_t> t_bus(k + 1, 0), t_srbus(k + 1, 0), t_out(k + 1, 0);
  std::vector<uint8_t> t_faw(k + 1, 0), t_far(k + 1, 0), t_fsr(k + 1, 0),
      t_ftr(k + 1, 0);

  auto pack = [&](const std::vector<uint64_t> & sl) {
    uint64_t v = 0;
    for (unsigned j = 0; j < R; ++j) v |= sl[j] << (j * p.word_width);
    return v;
  };
  auto word_slice = [&](uint64_t line, uint64_t sl) {
    return (line >> (sl * p.word_width)) & wmask;
  };

  for (size_t i = 0; i < k; ++i) {
    bool faw = aw_at.count(i) != 0, far = ar_at.count(i) != 0;
    bool fsr = sr_at.count(i) != 0, ftr = tr_at.count(i) != 0;
    uint64_t in_v = 0;
    if (faw) {
      std::optional<uint64_t> pin;
      auto it = parent.inputs[i].values.find("in");
      if (it != parent.inputs[i].values.end()) pin = it->second;
      if (!pin) {
        throw ModelError("schedule consumes an unpinned input at step "
                         + std::to_string(i));
      }
      in_v = *pin & wmask;
    }

    std::vector<uint64_t> slots_next = slots;
    if (faw) slots_next[s.aw_slots[aw_at[i]]] = in_v;
    uint64_t bus_next = pack(slots_next);
    std::vector<uint64_t> lines_next = lines;
    if (far) lines_next[s.ar_lines[ar_at[i]]] = bus;
    size_t reads = sr_done + (fsr ? 1 : 0);
    uint64_t srbus_next = lines_next[s.sr_lines[reads % s.sr_lines.size()]];
    uint64_t tb_next = fsr ? srbus : tbreg;
    uint64_t out_next =
        ftr ? word_slice(tbreg, s.tr_slices[tr_at[i]]) : outreg;

    slots = std::move(slots_next);
    lines = std::move(lines_next);
    bus = bus_next;
    srbus = srbus_next;
    tbreg = tb_next;
    outreg = out_next;
    sr_done = reads;
    t_bus[i + 1] = bus;
    t_srbus[i + 1] = srbus;
    t_out[i + 1] = outreg;
    t_faw[i + 1] = faw;
    t_far[i + 1] = far;
    t_fsr[i + 1] = fsr;
    t_ftr[i + 1] = ftr;
  }

  // the schedule must actually reproduce the example
  for (size_t step = 0; step <= k; ++step) {
    auto it = parent.outputs[step].values.find("out");
    if (it == parent.outputs[step].values.end() || !it->second) continue;
    if (t_out[step] != *it->second) {
      throw ModelError("planned schedule misses output at step "
                       + std::to_string(step));
    }
  }

  Trace agg_t, sram_t, tb_t;
  agg_t.inputs = parent.inputs;
  agg_t.outputs.resize(k + 1);
  sram_t.inputs.resize(k);
  sram_t.outputs.resize(k + 1);
  tb_t.inputs.resize(k);
  tb_t.outputs.resize(k + 1);
  for (size_t step = 0; step <= k; ++step) {
    agg_t.outputs[step].values["agg_bus"] = t_bus[step];
    agg_t.outputs[step].values["aw_acc_fire"] = t_faw[step];
    agg_t.outputs[step].values["ar_acc_fire"] = t_far[step];
    sram_t.outputs[step].values["agg_bus"] = t_bus[step];
    sram_t.outputs[step].values["sram_bus"] = t_srbus[step];
    sram_t.outputs[step].values["ar_acc_fire"] = t_far[step];
    sram_t.outputs[step].values["sr_acc_fire"] = t_fsr[step];
    tb_t.outputs[step].values["out"] = t_out[step];
    tb_t.outputs[step].values["sram_bus"] = t_srbus[step];
    tb_t.outputs[step].values["sr_acc_fire"] = t_fsr[step];
    tb_t.outputs[step].values["tr_acc_fire"] = t_ftr[step];
  }
  validate_trace(agg_t, tile.parts[0].system);
  validate_trace(sram_t, tile.parts[1].system);
  validate_trace(tb_t, tile.parts[2].system);

  return TilePlan{ k, std::move(parent),
                   { std::move(agg_t), std::move(sram_t), std::move(tb_t) } };
}

void check_range_field(uint64_t value, unsigned range_width,
                       const char * what)
{
  if (value > width_mask(range_width)) {
    throw ModelError(std::string(what) + " does not fit the range fields");
  }
}

}  // namespace

TilePlan plan_identity(const MiniTile & tile, unsigned width,
                       unsigned height, size_t latency)
{
  const MiniTileParams & p = tile.params;
  unsigned R = p.pack_ratio;
  unsigned rw = tile.generators[0].params.range_width;
  uint64_t n = uint64_t{ width } * height;
  if (n == 0) throw ModelError("identity plan needs a nonempty image");
  if (n > width_mask(p.word_width)) {
    throw ModelError("identity words do not fit the word width");
  }
  uint64_t nl = (n + R - 1) / R;
  if (nl > p.sram_depth) throw ModelError("image does not fit the sram");
  if (nl > 1 && n % R != 0) {
    throw ModelError("multi-line identity needs whole packed lines");
  }
  check_range_field(R, rw, "pack ratio");
  check_range_field(nl, rw, "line count");
  check_range_field(std::min<uint64_t>(n, R), rw, "word count");
  if (latency < 2) throw ModelError("identity latency too small");

  Schedule s;
  for (uint64_t i = 0; i < n; ++i) {
    s.aw_fires.push_back(i);
    s.aw_slots.push_back(i % R);
  }
  for (uint64_t b = 0; b < nl; ++b) {
    s.ar_fires.push_back(std::min<uint64_t>(n, (b + 1) * R));
    s.ar_lines.push_back(b);
  }
  for (uint64_t b = 0; b < nl; ++b) {
    uint64_t load = latency - 2 + b * R;
    if (load < s.ar_fires[b] + 1) {
      throw ModelError("identity latency too small for the pack depth");
    }
    s.sr_fires.push_back(load);
    s.sr_lines.push_back(b);
  }
  for (uint64_t j = 0; j < n; ++j) {
    s.tr_fires.push_back(latency - 1 + j);
    s.tr_slices.push_back(j % R);
  }
  return plan_from_schedule(tile, gen_identity_trace(width, height, latency),
                            s, latency + n - 1);
}

TilePlan plan_conv3x3(const MiniTile & tile, unsigned width,
                      unsigned height, size_t latency)
{
  const MiniTileParams & p = tile.params;
  unsigned R = p.pack_ratio;
  unsigned rw = tile.generators[0].params.range_width;
  if (width != R) {
    throw ModelError("conv3x3 planning needs width == pack_ratio");
  }
  if (width < 3 || height < 3) {
    throw ModelError("conv3x3 plan needs at least a 3x3 image");
  }
  if (height > p.sram_depth) {
    throw ModelError("image rows do not fit the sram");
  }
  if (p.maxdim < 4) throw ModelError("conv3x3 needs maxdim >= 4");
  if (latency < 2) throw ModelError("conv3x3 latency too small");
  check_range_field(R, rw, "pack ratio");
  check_range_field(height, rw, "row count");

  unsigned wc = width - 2, wr = height - 2;
  uint64_t off = latency - 2;
  Schedule s;
  for (uint64_t i = 0; i < uint64_t{ width } * height; ++i) {
    s.aw_fires.push_back(i);
    s.aw_slots.push_back(i % R);
  }
  for (unsigned r = 0; r < height; ++r) {
    s.ar_fires.push_back(uint64_t{ r + 1 } * R);
    s.ar_lines.push_back(r);
  }
  for (unsigned r = 0; r < wr; ++r) {
    for (unsigned c = 0; c < wc; ++c) {
      for (unsigned w = 0; w < 3; ++w) {
        uint64_t g = w + 3 * (uint64_t{ c } + wc * r);
        uint64_t load = off + 3 * g;
        uint64_t line = r + w;
        if (load < uint64_t{ line + 1 } * R + 1) {
          throw ModelError("conv3x3 latency too small for the write phase");
        }
        s.sr_fires.push_back(load);
        s.sr_lines.push_back(line);
        for (unsigned sl = 0; sl < 3; ++sl) {
          s.tr_fires.push_back(load + 1 + sl);
          s.tr_slices.push_back(c + sl);
        }
      }
    }
  }
  size_t k = latency + 9 * size_t{ wc } * wr - 1;
  return plan_from_schedule(tile, gen_conv3x3_trace(width, height, latency),
                            s, k);
}

AffineConfig extract_affine_config(const Configuration & config,
                                   const GeneratorGroup & group)
{
  auto value_of = [&](const Variable & v) {
    std::optional<Value> x = config.find(v.name);
    if (!x) {
      throw ModelError("configuration is missing '" + v.name + "'");
    }
    return x->v;
  };
  AffineConfig c;
  c.dim = unsigned(value_of(group.dim));
  if (c.dim > group.ranges.size()) {
    throw ModelError("configured dim exceeds the generator shape");
  }
  for (unsigned j = 0; j < c.dim; ++j) {
    c.ranges.push_back(value_of(group.ranges[j]));
    c.strides.push_back(value_of(group.strides[j]));
  }
  c.offset = value_of(group.offset);
  return c;
}

namespace {

std::string loop_nest_comment(const AffineConfig & c)
{
  std::ostringstream os;
  if (c.dim == 0) {
    os << "value = " << c.offset;
    return os.str();
  }
  for (unsigned j = c.dim; j-- > 0;) {
    os << "for c" << j << " in [0," << c.ranges[j] << "): ";
  }
  os << "value = ";
  for (unsigned j = c.dim; j-- > 0;) {
    os << c.strides[j] << "*c" << j << " + ";
  }
  os << c.offset;
  return os.str();
}

}  // namespace

std::string render_configuration(const Configuration & config,
                                 const std::vector<GeneratorGroup> & groups)
{
  std::ostringstream os;
  for (const GeneratorGroup & g : groups) {
    AffineConfig c = extract_affine_config(config, g);
    os << "generator " << g.name << "\n";
    os << "  dim " << c.dim << "\n";
    for (uint64_t r : c.ranges) os << "  range " << r << "\n";
    for (uint64_t s : c.strides) os << "  stride " << s << "\n";
    os << "  offset " << c.offset << "\n";
    os << "  # " << loop_nest_comment(c) << "\n";
  }
  return os.str();
}

std::map<std::string, AffineConfig>
parse_configuration_report(const std::string & text)
{
  std::map<std::string, AffineConfig> out;
  AffineConfig * cur = nullptr;
  std::istringstream is(text);
  std::string line;
  auto number = [](const std::string & tok) -> uint64_t {
    try {
      size_t pos = 0;
      uint64_t v = std::stoull(tok, &pos);
      if (pos != tok.size()) throw std::invalid_argument(tok);
      return v;
    } catch (const std::exception &) {
      throw ParseError("expected a number, got '" + tok + "'");
    }
  };
  while (std::getline(is, line)) {
    size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    if (key == "generator") {
      std::string name;
      if (!(ls >> name)) throw ParseError("generator line without a name");
      if (out.count(name)) {
        throw ParseError("duplicate generator '" + name + "'");
      }
      cur = &out[name];
      continue;
    }
    if (cur == nullptr) {
      throw ParseError("field before any generator line");
    }
    std::string tok;
    if (!(ls >> tok)) throw ParseError("field '" + key + "' without a value");
    if (key == "dim") {
      cur->dim = unsigned(number(tok));
    } else if (key == "range") {
      cur->ranges.push_back(number(tok));
    } else if (key == "stride") {
      cur->strides.push_back(number(tok));
    } else if (key == "offset") {
      cur->offset = number(tok);
    } else {
      throw ParseError("unknown configuration field '" + key + "'");
    }
  }
  for (const auto & [name, cfg] : out) {
    if (cfg.ranges.size() != cfg.dim || cfg.strides.size() != cfg.dim) {
      throw ParseError("generator '" + name
                       + "' lists fields inconsistent with its dim");
    }
  }
  return out;
}

}  // namespace cfgsmith
