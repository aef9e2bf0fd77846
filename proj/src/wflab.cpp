#include "cyclind/wflab.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace cyclind::wflab {

Rel rel_union(const System& s) {
  Rel u;
  for (const Rel& r : s.rels) u.insert(r.begin(), r.end());
  return u;
}

bool is_wellfounded(const std::vector<Elem>& universe, const Rel& r) {
  // cycle detection over the digraph of >
  std::map<Elem, int> state;
  for (Elem e : universe) state[e] = 0;
  std::function<bool(Elem)> dfs = [&](Elem v) -> bool {
    state[v] = 1;
    for (const auto& [a, b] : r) {
      if (a != v) continue;
      if (state[b] == 1) return false;
      if (state[b] == 0 && !dfs(b)) return false;
    }
    state[v] = 2;
    return true;
  };
  for (Elem e : universe)
    if (state[e] == 0 && !dfs(e)) return false;
  return true;
}

Rel power(const Rel& r, unsigned n) {
  if (n == 0) throw std::invalid_argument("power: n must be positive");
  Rel acc = r;
  for (unsigned i = 1; i < n; i++) {
    Rel next;
    for (const auto& [a, b] : acc)
      for (const auto& [c, d] : r)
        if (b == c) next.insert({a, d});
    acc = std::move(next);
  }
  return acc;
}

Rel product2(const std::vector<Elem>& u1, const Rel& r1, const std::vector<Elem>& u2,
             const Rel& r2, std::vector<Elem>& universe_out) {
  auto code = [&](std::size_t i, std::size_t j) {
    return static_cast<Elem>(i * u2.size() + j);
  };
  universe_out.clear();
  for (std::size_t i = 0; i < u1.size(); i++)
    for (std::size_t j = 0; j < u2.size(); j++) universe_out.push_back(code(i, j));
  Rel out;
  for (std::size_t i = 0; i < u1.size(); i++)
    for (std::size_t j = 0; j < u2.size(); j++) {
      for (std::size_t i2 = 0; i2 < u1.size(); i2++)
        if (r1.count({u1[i], u1[i2]})) out.insert({code(i, j), code(i2, j)});
      for (std::size_t j2 = 0; j2 < u2.size(); j2++)
        if (r2.count({u2[j], u2[j2]})) out.insert({code(i, j), code(i, j2)});
    }
  return out;
}

Rel restrict_rel(const Rel& r, const std::set<Elem>& v) {
  Rel out;
  for (const auto& [a, b] : r)
    if (v.count(a) && v.count(b)) out.insert({a, b});
  return out;
}

SeqRel ext_relation(const SeqSet& t) {
  SeqRel out;
  for (const Seq& x : t)
    for (const Seq& y : t) {
      if (y.size() != x.size() + 1) continue;
      if (std::equal(x.begin(), x.end(), y.begin())) out.insert({x, y});
    }
  return out;
}

SeqSet ds(const std::vector<Elem>& u, const Rel& r) {
  if (!is_wellfounded(u, r))
    throw std::invalid_argument("ds: relation has a cycle; enumeration would not terminate");
  SeqSet out{{}};
  std::vector<Seq> frontier{{}};
  while (!frontier.empty()) {
    std::vector<Seq> next;
    for (const Seq& x : frontier)
      for (Elem e : u) {
        if (!x.empty() && !r.count({x.back(), e})) continue;
        Seq y = x;
        y.push_back(e);
        out.insert(y);
        next.push_back(std::move(y));
      }
    frontier = std::move(next);
  }
  return out;
}

SeqSet dt(const std::vector<Elem>& u, const Rel& r) {
  SeqSet all = ds(u, r);
  SeqSet out;
  for (const Seq& x : all) {
    bool trans = true;
    for (std::size_t i = 0; i < x.size() && trans; i++)
      for (std::size_t j = i + 1; j < x.size() && trans; j++)
        if (!r.count({x[i], x[j]})) trans = false;
    if (trans) out.insert(x);
  }
  return out;
}

bool monoseq(const System& s, const Seq& x) {
  // x in DT(union) and every element's outgoing color is uniform rightwards
  Rel u = rel_union(s);
  for (std::size_t i = 0; i < x.size(); i++)
    for (std::size_t j = i + 1; j < x.size(); j++)
      if (!u.count({x[i], x[j]})) return false;
  for (std::size_t i = 0; i + 1 < x.size(); i++)
    for (std::size_t j = i + 1; j < x.size(); j++)
      for (std::size_t l = 0; l < s.rels.size(); l++)
        if (s.rels[l].count({x[i], x[i + 1]}) && !s.rels[l].count({x[i], x[j]})) return false;
  return true;
}

SeqSet ms(const System& s) {
  SeqSet out;
  for (const Seq& x : dt(s.universe, rel_union(s)))
    if (monoseq(s, x)) out.insert(x);
  return out;
}

SeqSet ms_r(const System& s, Elem r) {
  SeqSet out;
  for (const Seq& x : ms(s))
    if (!x.empty() && x[0] == r) out.insert(x);
  return out;
}

bool kb_gt(const SeqSet& tree, const std::function<bool(Elem, Elem, Elem)>& gt_u, const Seq& x,
           const Seq& y) {
  if (!tree.count(x) || !tree.count(y)) return false;
  // (2) y extends x properly
  if (y.size() > x.size() && std::equal(x.begin(), x.end(), y.begin())) return true;
  // (1) sibling split after a nonempty common prefix
  std::size_t p = 0;
  while (p < x.size() && p < y.size() && x[p] == y[p]) p++;
  if (p == 0 || p >= x.size() || p >= y.size()) return false;
  return gt_u(x[p - 1], x[p], y[p]);
}

SeqRel kb_relation(const SeqSet& tree, const std::function<bool(Elem, Elem, Elem)>& gt_u) {
  SeqRel out;
  for (const Seq& x : tree)
    for (const Seq& y : tree)
      if (kb_gt(tree, gt_u, x, y)) out.insert({x, y});
  return out;
}

bool left_gt(const System& s, Elem u, Elem a, Elem b) {
  for (std::size_t j = 0; j < s.rels.size(); j++)
    for (std::size_t l = j + 1; l < s.rels.size(); l++)
      if (s.rels[j].count({u, a}) && s.rels[l].count({u, b})) return true;
  return false;
}

SeqRel kb1(const System& s, Elem r) {
  SeqSet t = ms_r(s, r);
  return kb_relation(t, [&](Elem u, Elem a, Elem b) { return left_gt(s, u, a, b); });
}

SeqRel kb2(const System& s, Elem r) {
  SeqSet t = ms_r(s, r);
  return kb_relation(t, [&](Elem u, Elem a, Elem b) { return left_gt(s, u, b, a); });
}

bool kb_main_gt(const System& s, const SeqSet& tree, const std::vector<Seq>& x,
                const std::vector<Seq>& y) {
  // KB over sequences whose entries are MS_r members: (2) proper extension,
  // (1) sibling split decided by >KB1 after a nonempty common prefix.
  if (y.size() > x.size() && std::equal(x.begin(), x.end(), y.begin())) return true;
  std::size_t p = 0;
  while (p < x.size() && p < y.size() && x[p] == y[p]) p++;
  if (p == 0 || p >= x.size() || p >= y.size()) return false;
  return kb_gt(tree, [&](Elem u, Elem a, Elem b) { return left_gt(s, u, a, b); }, x[p], y[p]);
}

bool kb_main_gt(const System& s, Elem r, const std::vector<Seq>& x, const std::vector<Seq>& y) {
  return kb_main_gt(s, ms_r(s, r), x, y);
}

SeqSet insert_op(const System& s, Elem u, const SeqSet& t, const Seq& sigma) {
  if (!t.count(sigma)) throw std::invalid_argument("insert: sigma not in the tree");
  for (const Seq& rho : t)
    for (Elem v : rho)
      if (!rel_union(s).count({v, u}))
        throw std::invalid_argument("insert: an element does not dominate the new entry");
  // color of the edge from last(sigma) to u
  std::size_t color = s.rels.size();
  for (std::size_t i = 0; i < s.rels.size(); i++)
    if (s.rels[i].count({sigma.back(), u})) color = i;
  if (color == s.rels.size()) throw std::invalid_argument("insert: no edge color");
  // mu v: least child of sigma in t along the same color
  std::optional<Elem> least;
  for (const Seq& rho : t) {
    if (rho.size() != sigma.size() + 1) continue;
    if (!std::equal(sigma.begin(), sigma.end(), rho.begin())) continue;
    Elem v = rho.back();
    if (!s.rels[color].count({sigma.back(), v})) continue;
    if (!least || v < *least) least = v;
  }
  if (least) {
    Seq down = sigma;
    down.push_back(*least);
    return insert_op(s, u, t, down);
  }
  SeqSet out = t;
  Seq leaf = sigma;
  leaf.push_back(u);
  out.insert(leaf);
  return out;
}

SeqSet et(const System& s, const Seq& x) {
  if (x.empty()) throw std::invalid_argument("et: empty sequence");
  SeqSet t{{x[0]}};
  for (std::size_t i = 1; i < x.size(); i++) t = insert_op(s, x[i], t, {x[0]});
  return t;
}

std::vector<Seq> et2(const System& s, const Seq& x) { return et2(s, x, ms_r(s, x[0])); }

std::vector<Seq> et2(const System& s, const Seq& x, const SeqSet& tree) {
  SeqSet t = et(s, x);
  std::vector<Seq> out(t.begin(), t.end());
  auto right = [&](Elem u, Elem a, Elem b) { return left_gt(s, u, b, a); };
  std::sort(out.begin(), out.end(), [&](const Seq& a, const Seq& b) {
    if (a == b) return false;
    bool ab = kb_gt(tree, right, a, b);
    bool ba = kb_gt(tree, right, b, a);
    if (ab == ba) throw std::logic_error("et2: KB2 is not total on the derived tree");
    return ab;
  });
  return out;
}

System disjointify(const System& s) {
  System out = s;
  for (std::size_t i = 1; i < out.rels.size(); i++)
    for (std::size_t j = 0; j < i; j++)
      for (const auto& p : out.rels[j]) out.rels[i].erase(p);
  return out;
}

PrOutcome pr_check(const System& s0) {
  PrOutcome out;
  auto fail = [&](const std::string& lemma) {
    out.ok = false;
    out.failed_lemma = lemma;
    return out;
  };
  Rel u0 = rel_union(s0);
  for (const Rel& r : s0.rels)
    if (!is_wellfounded(s0.universe, r)) return fail("precondition: a color has a cycle");
  for (const auto& [a, b] : u0)
    for (const auto& [c, d] : u0)
      if (b == c && !u0.count({a, d})) return fail("precondition: union not transitive");

  System s = disjointify(s0);
  if (!(rel_union(s) == u0)) return fail("disjointify preserves the union");
  for (std::size_t i = 0; i < s.rels.size(); i++)
    for (std::size_t j = i + 1; j < s.rels.size(); j++)
      for (const auto& p : s.rels[i])
        if (s.rels[j].count(p)) return fail("disjointify yields disjoint colors");

  // ind-ne at the finite level: no reflexive pair in an acyclic relation.
  for (const auto& [a, b] : u0)
    if (a == b) return fail("ind-ne");

  Rel u = rel_union(s);
  SeqSet dtall = dt(s.universe, u);
  for (const Seq& x : dtall)
    if (x.size() > out.witness.size()) out.witness = x;

  // Under a transitive union, decreasing sequences are transitive.
  if (!(ds(s.universe, u) == dtall)) return fail("DT equals DS under transitivity");

  for (Elem r : s.universe) {
    SeqSet msr = ms_r(s, r);
    SeqSet dtr;
    for (const Seq& x : dtall)
      if (!x.empty() && x[0] == r) dtr.insert(x);
    for (const Seq& x : msr) {
      if (!dtall.count(x)) return fail("MS is contained in DT");
      if (!monoseq(s, x)) return fail("MS members satisfy the coloring predicate");
    }
    // Theorem KB at finite scale for both sibling orders.
    {
      SeqRel k1 = kb1(s, r);
      std::set<Seq> nodes(msr.begin(), msr.end());
      std::map<Seq, int> idx;
      std::vector<Elem> named;
      for (const Seq& q : nodes) {
        idx[q] = static_cast<int>(named.size());
        named.push_back(static_cast<Elem>(named.size()));
      }
      auto as_rel = [&](const SeqRel& sr) {
        Rel rr;
        for (const auto& [a, b] : sr) rr.insert({static_cast<Elem>(idx[a]), static_cast<Elem>(idx[b])});
        return rr;
      };
      if (!is_wellfounded(named, as_rel(k1))) return fail("KB1 acyclic (Theorem KB)");
      if (!is_wellfounded(named, as_rel(kb2(s, r)))) return fail("KB2 acyclic (Theorem KB)");
    }
    // Erdos trees: insertion shape, per-color uniqueness, ET2 monotonicity.
    for (const Seq& x : dtr) {
      if (x.empty()) continue;
      SeqSet tx = et(s, x);
      // insert(1): built incrementally, so |ET(x)| = |x|
      if (tx.size() != x.size()) return fail("insert adds exactly one leaf");
      // every element of x appears in the tree
      {
        std::set<Elem> in_tree;
        for (const Seq& rho : tx)
          for (Elem e : rho) in_tree.insert(e);
        std::set<Elem> in_x(x.begin(), x.end());
        if (in_tree != in_x) return fail("ET carries exactly the sequence elements");
      }
      // insert(2): a parent has at most one child per color
      for (const Seq& rho : tx) {
        if (rho.size() < 2) continue;
        Seq parent(rho.begin(), rho.end() - 1);
        for (const Seq& rho2 : tx) {
          if (rho2.size() != rho.size() || rho2 == rho) continue;
          if (!std::equal(parent.begin(), parent.end(), rho2.begin())) continue;
          for (const Rel& rl : s.rels)
            if (rl.count({parent.back(), rho.back()}) && rl.count({parent.back(), rho2.back()}))
              return fail("insert keeps child colors distinct");
        }
      }
      // members are monotonically colored
      for (const Seq& rho : tx)
        if (!monoseq(s, rho)) return fail("ET lives inside MS");
      // Lemma ET: one-step extensions decrease in KB
      for (Elem e : s.universe) {
        Seq y = x;
        y.push_back(e);
        if (!dtall.count(y)) continue;
        out.et2_checks++;
        if (!kb_main_gt(s, msr, et2(s, x, msr), et2(s, y, msr)))
          return fail("ET2 monotone (Lemma ET)");
      }
    }
  }
  out.union_acyclic = is_wellfounded(s.universe, u);
  if (!out.union_acyclic) return fail("union acyclic");
  out.ok = true;
  return out;
}

// ------------------------------------------------------------ text formats

std::string to_string(const System& s) {
  std::ostringstream o;
  o << "universe";
  for (Elem e : s.universe) o << " " << e;
  o << "\n";
  for (std::size_t i = 0; i < s.rels.size(); i++) {
    o << "rel " << i + 1;
    for (const auto& [a, b] : s.rels[i]) o << " " << a << ">" << b;
    o << "\n";
  }
  return o.str();
}

System parse_system(const std::string& src) {
  System s;
  std::istringstream in(src);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string head;
    ls >> head;
    if (head == "universe") {
      Elem e;
      while (ls >> e) s.universe.push_back(e);
    } else if (head == "rel") {
      int index;
      ls >> index;
      Rel r;
      std::string pair;
      while (ls >> pair) {
        auto gt = pair.find('>');
        if (gt == std::string::npos) throw std::invalid_argument("rel pair needs a>b");
        r.insert({static_cast<Elem>(std::stoul(pair.substr(0, gt))),
                  static_cast<Elem>(std::stoul(pair.substr(gt + 1)))});
      }
      s.rels.push_back(std::move(r));
    } else {
      throw std::invalid_argument("system line must start with universe/rel");
    }
  }
  if (s.rels.empty()) s.rels.push_back({});
  return s;
}

SeqSet parse_tree(const std::string& src) {
  SeqSet t;
  std::istringstream in(src);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    Seq x;
    Elem e;
    while (ls >> e) x.push_back(e);
    t.insert(x);
  }
  return t;
}

}  // namespace cyclind::wflab
