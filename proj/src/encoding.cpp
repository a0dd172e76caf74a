#include "ringverify/encoding.hpp"

#include <set>

namespace ringverify::enc {

using namespace pb;

std::string ring_var() { return "y"; }
std::string position_var(std::size_t i) { return "p" + std::to_string(i); }
std::string next_position_var(std::size_t i) { return "p" + std::to_string(i) + "_next"; }
std::string view_var(std::size_t i) { return "d" + std::to_string(i); }
std::string reverted_view_var(std::size_t i) { return "dr" + std::to_string(i); }
std::string phase_var(std::size_t i, bool next) { return "s" + std::to_string(i) + (next ? "_next" : ""); }
std::string stored_view_var(std::size_t robot, std::size_t l, bool next) {
  return "v" + std::to_string(robot) + "_" + std::to_string(l) + (next ? "_next" : "");
}

std::vector<std::string> FreshNames::next(std::size_t count) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(next());
  return out;
}

namespace {

std::vector<Term> vars(const std::vector<std::string>& names) {
  std::vector<Term> out;
  for (auto& n : names) out.push_back(var(n));
  return out;
}

template <typename F>
std::vector<Term> indexed(std::size_t k, F name) {
  std::vector<Term> out;
  for (std::size_t i = 1; i <= k; ++i) out.push_back(var(name(i)));
  return out;
}

Term num(std::int64_t v) { return constant(v); }

// pj = (pi + o) mod y, linearized for pi in [0, y-1] and o in [1, y]
Formula lands_on(const Term& pj, const Term& pi, const Term& o, const Term& y) {
  return conj({disj({eq(pj, add(pi, o)), eq(pj, sub(add(pi, o), y))}), lt(pj, y)});
}

void require_k(std::size_t k) {
  if (k < 2) throw Error("encodings need at least two robots");
}

}  // namespace

Formula instantiate(const Formula& f, const std::vector<Term>& terms) {
  std::map<std::string, Term> m;
  auto fv = free_vars(f);
  for (std::size_t l = 1; l <= terms.size(); ++l)
    if (fv.count(robot_var(l))) m[robot_var(l)] = terms[l - 1];
  return substitute(f, m);
}

Formula instantiate(const Protocol& phi, const std::vector<Term>& terms) {
  if (terms.size() != phi.robots()) throw Error("protocol arity mismatch");
  return instantiate(phi.body(), terms);
}

Formula config_view(FreshNames& fresh, std::size_t i, const Term& y, const std::vector<Term>& p,
                    const std::vector<Term>& d) {
  const std::size_t k = p.size();
  require_k(k);
  if (d.size() != k || i < 1 || i > k) throw Error("config_view: bad arity or robot index");
  auto offset_names = fresh.next(k - 1);
  auto robot_names = fresh.next(k - 1);
  auto o = vars(offset_names);
  auto who = vars(robot_names);
  const Term& pi = p[i - 1];

  std::vector<Formula> parts;
  for (std::size_t j = 0; j + 1 < k - 1; ++j) parts.push_back(le(o[j], o[j + 1]));
  // offset l is realized by robot who[l]; distinct offsets name distinct robots
  for (std::size_t l = 0; l < k - 1; ++l) {
    std::vector<Formula> options;
    for (std::size_t j = 1; j <= k; ++j) {
      if (j == i) continue;
      options.push_back(conj({eq(who[l], num(static_cast<std::int64_t>(j))), lands_on(p[j - 1], pi, o[l], y)}));
    }
    parts.push_back(disj(std::move(options)));
  }
  for (std::size_t l = 0; l < k - 1; ++l)
    for (std::size_t m = l + 1; m < k - 1; ++m) parts.push_back(ne(who[l], who[m]));
  parts.push_back(lt(num(0), o[0]));
  for (std::size_t l = 0; l < k - 1; ++l) parts.push_back(le(o[l], y));
  parts.push_back(eq(d[0], o[0]));
  for (std::size_t l = 1; l < k - 1; ++l) parts.push_back(eq(d[l], sub(o[l], o[l - 1])));
  parts.push_back(eq(d[k - 1], sub(y, o[k - 2])));

  std::vector<std::string> bound = offset_names;
  bound.insert(bound.end(), robot_names.begin(), robot_names.end());
  return exists(bound, conj(std::move(parts)));
}

Formula view_sym(const std::vector<Term>& d, const std::vector<Term>& dr) {
  const std::size_t k = d.size();
  if (dr.size() != k) throw Error("view_sym: arity mismatch");
  std::vector<Formula> cases;
  for (std::size_t j = 1; j <= k; ++j) {
    // j is the last nonzero distance
    std::vector<Formula> c{ge(d[j - 1], num(1))};
    for (std::size_t l = j + 1; l <= k; ++l) {
      c.push_back(eq(d[l - 1], num(0)));
      c.push_back(eq(dr[l - 1], num(0)));
    }
    for (std::size_t l = 1; l <= j; ++l) c.push_back(eq(dr[l - 1], d[j - l]));
    cases.push_back(conj(std::move(c)));
  }
  return disj(std::move(cases));
}

Formula move_from_view(FreshNames& fresh, const Protocol& phi, const Term& y, const Term& pi,
                       const std::vector<Term>& v, const Term& target, const Options& opts) {
  const std::size_t k = phi.robots();
  if (v.size() != k) throw Error("move: view arity mismatch");
  auto rev_names = fresh.next(k);
  auto rev = vars(rev_names);
  Formula cw_here = nnf(instantiate(phi, v));
  Formula ccw_here = nnf(instantiate(phi, rev));
  Term wrap_cw = num(opts.fault == Fault::WraparoundOffByOne ? 1 : 0);
  Formula clockwise = disj({conj({lt(pi, sub(y, num(1))), eq(target, add(pi, num(1)))}),
                            conj({eq(pi, sub(y, num(1))), eq(target, wrap_cw)})});
  Formula anticlockwise = disj({conj({gt(pi, num(0)), eq(target, sub(pi, num(1)))}),
                                conj({eq(pi, num(0)), eq(target, sub(y, num(1)))})});
  Formula stay = conj({nnf(negate(cw_here)), nnf(negate(ccw_here)), eq(target, pi)});
  Formula choice = disj({conj({cw_here, clockwise}), conj({ccw_here, anticlockwise}), stay});
  return exists(rev_names, conj({view_sym(v, rev), choice}));
}

Formula move(FreshNames& fresh, const Protocol& phi, std::size_t i, const Term& y, const std::vector<Term>& p,
             const Term& target, const Options& opts) {
  const std::size_t k = phi.robots();
  if (p.size() != k || i < 1 || i > k) throw Error("move: bad arity or robot index");
  auto view_names = fresh.next(k);
  auto d = vars(view_names);
  return exists(view_names, conj({config_view(fresh, i, y, p, d), move_from_view(fresh, phi, y, p[i - 1], d, target, opts)}));
}

Formula config_view_formula(std::size_t i, std::size_t k) {
  FreshNames fresh;
  return config_view(fresh, i, var(ring_var()), indexed(k, position_var), indexed(k, view_var));
}

Formula view_sym_formula(std::size_t k) {
  require_k(k);
  return view_sym(indexed(k, view_var), indexed(k, reverted_view_var));
}

Formula move_formula(const Protocol& phi, std::size_t i, const std::string& target, const Options& opts) {
  FreshNames fresh;
  return move(fresh, phi, i, var(ring_var()), indexed(phi.robots(), position_var), var(target), opts);
}

namespace {

Formula post_with(FreshNames& fresh, const Protocol& phi, Mode mode, const Options& opts) {
  const std::size_t k = phi.robots();
  auto y = var(ring_var());
  auto p = indexed(k, position_var);
  auto q = indexed(k, next_position_var);
  switch (mode) {
    case Mode::Sync: {
      std::vector<Formula> all;
      for (std::size_t i = 1; i <= k; ++i) all.push_back(move(fresh, phi, i, y, p, q[i - 1], opts));
      return conj(std::move(all));
    }
    case Mode::SemiSync: {
      std::vector<Formula> some;
      for (std::size_t i = 1; i <= k; ++i) {
        std::vector<Formula> c{move(fresh, phi, i, y, p, q[i - 1], opts)};
        for (std::size_t j = 1; j <= k; ++j) {
          if (j == i) continue;
          c.push_back(disj({eq(q[j - 1], p[j - 1]), move(fresh, phi, j, y, p, q[j - 1], opts)}));
        }
        some.push_back(conj(std::move(c)));
      }
      return disj(std::move(some));
    }
    case Mode::Async: break;
  }
  throw Error("no one-step configuration formula for asynchronous mode; use async_post_formula");
}

}  // namespace

Formula post_formula(const Protocol& phi, Mode mode, const Options& opts) {
  FreshNames fresh;
  return post_with(fresh, phi, mode, opts);
}

Formula async_post_formula(const Protocol& phi, const Options& opts) {
  const std::size_t k = phi.robots();
  FreshNames fresh;
  auto y = var(ring_var());
  auto p = indexed(k, position_var);
  auto q = indexed(k, next_position_var);
  auto stored = [&](std::size_t i, bool next) {
    std::vector<Term> v;
    for (std::size_t l = 1; l <= k; ++l) v.push_back(var(stored_view_var(i, l, next)));
    return v;
  };
  auto placeholder = [&](const std::vector<Term>& v) {
    std::vector<Formula> c{eq(v[0], y)};
    for (std::size_t l = 1; l < k; ++l) c.push_back(eq(v[l], num(0)));
    return conj(std::move(c));
  };
  auto same = [&](const std::vector<Term>& a, const std::vector<Term>& b) {
    std::vector<Formula> c;
    for (std::size_t l = 0; l < k; ++l) c.push_back(eq(a[l], b[l]));
    return conj(std::move(c));
  };

  auto look_names = fresh.next(k);
  auto looked = vars(look_names);
  std::vector<Formula> steps;
  for (std::size_t i = 1; i <= k; ++i) {
    Term s = var(phase_var(i)), s_next = var(phase_var(i, true));
    std::vector<Formula> c;
    for (std::size_t j = 1; j <= k; ++j) {
      if (j == i) continue;
      c.push_back(eq(q[j - 1], p[j - 1]));
      c.push_back(eq(var(phase_var(j, true)), var(phase_var(j))));
      c.push_back(same(stored(j, true), stored(j, false)));
    }
    c.push_back(eq(s_next, sub(num(1), s)));
    Formula look = conj({eq(s, num(0)), placeholder(stored(i, false)), same(stored(i, true), looked),
                         config_view(fresh, i, y, p, looked), eq(q[i - 1], p[i - 1])});
    Formula act = conj({eq(s, num(1)), placeholder(stored(i, true)),
                        move_from_view(fresh, phi, y, p[i - 1], stored(i, false), q[i - 1], opts)});
    c.push_back(disj({look, act}));
    steps.push_back(conj(std::move(c)));
  }
  return exists(look_names, disj(std::move(steps)));
}

Formula config_view_formula_unindexed(std::size_t i, std::size_t k) {
  require_k(k);
  FreshNames fresh;
  auto y = var(ring_var());
  auto p = indexed(k, position_var);
  auto d = indexed(k, view_var);
  auto names = fresh.next(k - 1);
  auto o = vars(names);
  const Term& pi = p[i - 1];
  std::vector<Formula> parts;
  for (std::size_t j = 0; j + 1 < k - 1; ++j) parts.push_back(le(o[j], o[j + 1]));
  for (std::size_t j = 1; j <= k; ++j) {
    if (j == i) continue;
    std::vector<Formula> any;
    for (std::size_t l = 0; l < k - 1; ++l) any.push_back(lands_on(p[j - 1], pi, o[l], y));
    parts.push_back(disj(std::move(any)));
  }
  for (std::size_t l = 0; l < k - 1; ++l) {
    std::vector<Formula> any;
    for (std::size_t j = 1; j <= k; ++j)
      if (j != i) any.push_back(lands_on(p[j - 1], pi, o[l], y));
    parts.push_back(disj(std::move(any)));
  }
  parts.push_back(lt(num(0), o[0]));
  for (std::size_t l = 0; l < k - 1; ++l) parts.push_back(le(o[l], y));
  parts.push_back(eq(d[0], o[0]));
  for (std::size_t l = 1; l < k - 1; ++l) parts.push_back(eq(d[l], sub(o[l], o[l - 1])));
  parts.push_back(eq(d[k - 1], sub(y, o[k - 2])));
  return exists(names, conj(std::move(parts)));
}

// ---------------------------------------------------------------------------
// Queries

std::string to_string(Purpose p) {
  switch (p) {
    case Purpose::Safety: return "safety";
    case Purpose::Validity: return "validity";
    case Purpose::UniqSeq: return "uniqseq";
  }
  return "?";
}

void check_conventions(std::size_t k, const Formula& ring, const Formula& bad) {
  if (ring) {
    if (!is_quantifier_free(ring)) throw Error("ring formula must be quantifier free");
    for (auto& v : free_vars(ring))
      if (v != ring_var()) throw Error("ring formula may only mention y, found '" + v + "'");
  }
  if (bad) {
    if (!is_quantifier_free(bad)) throw Error("bad formula must be quantifier free");
    auto idx = max_robot_index(free_vars(bad), true);
    if (idx > k)
      throw Error("bad formula mentions x" + std::to_string(idx) + " but the protocol has " + std::to_string(k) +
                  " robots");
  }
}

namespace {

struct QueryBuilder {
  VerificationQuery q;
  std::vector<Formula> domain;

  void declare(const std::string& name, VarRole role) {
    q.variables.push_back(name);
    q.roles[name] = role;
    domain.push_back(ge(var(name), num(0)));
  }

  void ring(std::size_t k) {
    declare(ring_var(), {Role::RingSize, 0, false});
    domain.push_back(ge(var(ring_var()), num(static_cast<std::int64_t>(k))));
  }

  void positions(std::size_t k, bool primed) {
    for (std::size_t i = 1; i <= k; ++i) {
      auto name = primed ? next_position_var(i) : position_var(i);
      declare(name, {Role::Position, i, primed});
      domain.push_back(lt(var(name), var(ring_var())));
    }
  }

  VerificationQuery finish(Formula assertion) {
    q.domain = conj(std::move(domain));
    q.body = conj({q.domain, std::move(assertion)});
    auto fv = free_vars(q.body);
    if (fv != std::set<std::string>(q.variables.begin(), q.variables.end()))
      throw Error("internal: query variables do not match the declared roles");
    return std::move(q);
  }
};

}  // namespace

VerificationQuery safety_query(const Protocol& phi, const Formula& ring, const Formula& bad, Mode mode,
                               const Options& opts) {
  const std::size_t k = phi.robots();
  check_conventions(k, ring, bad);
  if (mode == Mode::Async)
    throw Error("safety is undecidable in asynchronous mode; certify unique sequentializability and use sync");
  QueryBuilder b;
  b.q.purpose = Purpose::Safety;
  b.q.k = k;
  b.q.protocol = phi;
  b.q.ring = ring;
  b.q.bad = bad;
  b.q.mode = mode;
  b.ring(k);
  b.positions(k, false);
  b.positions(k, true);
  auto p = indexed(k, position_var);
  auto q = indexed(k, next_position_var);
  FreshNames fresh;
  return b.finish(conj({post_with(fresh, phi, mode, opts), ring, nnf(negate(instantiate(bad, p))),
                        nnf(instantiate(bad, q))}));
}

VerificationQuery uniqseq_query(const Protocol& phi, const Options& opts) {
  const std::size_t k = phi.robots();
  QueryBuilder b;
  b.q.purpose = Purpose::UniqSeq;
  b.q.k = k;
  b.q.protocol = phi;
  b.ring(k);
  b.positions(k, false);
  b.positions(k, true);
  auto y = var(ring_var());
  auto p = indexed(k, position_var);
  auto q = indexed(k, next_position_var);
  FreshNames fresh;
  std::vector<Formula> pairs;
  for (std::size_t i = 1; i <= k; ++i)
    for (std::size_t j = i + 1; j <= k; ++j)
      pairs.push_back(conj({move(fresh, phi, i, y, p, q[i - 1], opts), move(fresh, phi, j, y, p, q[j - 1], opts),
                            ne(q[i - 1], p[i - 1]), ne(q[j - 1], p[j - 1])}));
  return b.finish(disj(std::move(pairs)));
}

VerificationQuery validity_query(const Protocol& phi) {
  const std::size_t k = phi.robots();
  QueryBuilder b;
  b.q.purpose = Purpose::Validity;
  b.q.k = k;
  b.q.protocol = phi;
  b.ring(k);
  auto d = indexed(k, view_var);
  auto dr = indexed(k, reverted_view_var);
  for (std::size_t l = 1; l <= k; ++l) b.declare(view_var(l), {Role::ViewDistance, l, false});
  for (std::size_t l = 1; l <= k; ++l) b.declare(reverted_view_var(l), {Role::ViewDistance, l, true});
  Term sum = d[0];
  for (std::size_t l = 1; l < k; ++l) sum = add(sum, d[l]);
  b.domain.push_back(ge(d[0], num(1)));
  b.domain.push_back(eq(sum, var(ring_var())));
  std::vector<Formula> differs;
  for (std::size_t l = 0; l < k; ++l) differs.push_back(ne(d[l], dr[l]));
  return b.finish(conj({view_sym(d, dr), disj(std::move(differs)), nnf(instantiate(phi, d)), nnf(instantiate(phi, dr))}));
}

}  // namespace ringverify::enc
