#pragma once

// Exact combinatorial engine: Vandermonde products, Cauchy determinants,
// Pfaffians/Hafnians, equipartition sums, the interleaved power matrix
// M(lambda, X) and a catalog of exactly verifiable determinantal identities.

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "blockbeta/exact.hpp"

namespace blockbeta {

using IndexSet = std::vector<int>;  // sorted, duplicate-free, 0-based

inline void require_index_set(const IndexSet& s, int total) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] < 0 || s[i] >= total) throw std::domain_error("IndexSet: out of range");
    if (i > 0 && s[i] <= s[i - 1]) throw std::domain_error("IndexSet: not sorted distinct");
  }
}

inline IndexSet complement_set(const IndexSet& s, int total) {
  IndexSet out;
  std::size_t k = 0;
  for (int i = 0; i < total; ++i) {
    if (k < s.size() && s[k] == i) ++k;
    else out.push_back(i);
  }
  return out;
}

inline int perm_parity(const std::vector<int>& p) {
  std::vector<bool> seen(p.size(), false);
  int sign = 1;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (seen[i]) continue;
    std::size_t len = 0, j = i;
    while (!seen[j]) {
      seen[j] = true;
      j = std::size_t(p[j]);
      ++len;
    }
    if (len % 2 == 0) sign = -sign;
  }
  return sign;
}

// Parity of the permutation sending position a+(m-1)n to the a-th element of
// block m, blocks concatenated in ascending order.
inline int concat_sign(const std::vector<IndexSet>& blocks) {
  std::vector<int> p;
  for (const auto& b : blocks) p.insert(p.end(), b.begin(), b.end());
  return perm_parity(p);
}

// Ordered partition of {0..rn-1} into r ascending blocks of size n, with the
// parity of its concatenation permutation.
struct EquiPartition {
  std::vector<IndexSet> blocks;
  int sign = 1;
};

inline std::uint64_t equipartition_count(int r, int n) {
  std::uint64_t c = 1;
  int placed = 0;
  for (int b = 0; b < r; ++b)
    for (int k = 1; k <= n; ++k) c = c * std::uint64_t(++placed) / std::uint64_t(k);
  return c;
}

template <class F>
void enumerate_equipartitions(int r, int n, F&& cb) {
  if (r < 1 || n < 1) throw std::domain_error("enumerate_equipartitions: bad sizes");
  if (r * n > 16)
    throw std::domain_error("enumerate_equipartitions: rn > 16 (would emit " +
                            std::to_string(equipartition_count(r, n)) + " partitions)");
  const int rn = r * n;
  std::vector<IndexSet> blocks(static_cast<std::size_t>(r));
  std::vector<bool> used(std::size_t(rn), false);
  std::function<void(int)> rec = [&](int b) {
    if (b == r) {
      EquiPartition part{blocks, concat_sign(blocks)};
      cb(part);
      return;
    }
    IndexSet& blk = blocks[std::size_t(b)];
    std::function<void(int, int)> pick = [&](int start, int picked) {
      if (picked == n) {
        rec(b + 1);
        return;
      }
      for (int i = start; i < rn; ++i) {
        if (used[std::size_t(i)]) continue;
        used[std::size_t(i)] = true;
        blk.push_back(i);
        pick(i + 1, picked + 1);
        blk.pop_back();
        used[std::size_t(i)] = false;
      }
    };
    pick(0, 0);
  };
  rec(0);
}

// Delta = prod_{i<j} (v_j - v_i) over the list order.
inline Rat vandermonde(const RatVec& vals) {
  Rat out = 1;
  for (std::size_t i = 0; i < vals.size(); ++i)
    for (std::size_t j = i + 1; j < vals.size(); ++j) out *= vals[j] - vals[i];
  return out;
}

inline RatVec gather(const RatVec& lam, const IndexSet& s) {
  RatVec out;
  out.reserve(s.size());
  for (int i : s) out.push_back(lam[std::size_t(i)]);
  return out;
}

inline Rat vandermonde_subset(const RatVec& lam, const IndexSet& s) {
  return vandermonde(gather(lam, s));
}

// Theta(S1, S2) = prod_{a in S1, b in S2} (lam_a - lam_b); empty product = 1.
inline Rat theta(const IndexSet& s1, const IndexSet& s2, const RatVec& lam) {
  for (int a : s1)
    for (int b : s2)
      if (a == b) throw std::domain_error("theta: sets overlap");
  Rat out = 1;
  for (int a : s1)
    for (int b : s2) out *= lam[std::size_t(a)] - lam[std::size_t(b)];
  return out;
}

// Cauchy determinant det[1/(lam_a - lam_b)]_{a in A, b in A2} in closed form.
inline Rat cauchy_det(const IndexSet& a, const IndexSet& a2, const RatVec& lam) {
  if (a.size() != a2.size()) throw std::domain_error("cauchy_det: size mismatch");
  const long k = long(a.size());
  if (k == 0) return Rat(1);
  Rat th = theta(a, a2, lam);
  if (th == 0) throw std::domain_error("cauchy_det: repeated lambda");
  Rat num = vandermonde_subset(lam, a) * vandermonde_subset(lam, a2);
  Rat out = num / th;
  if ((k * (k - 1) / 2) % 2) out = -out;
  return out;
}

namespace detail {
// Matching-sum recursion: expand on the smallest live index.
inline Rat matching_sum(const RatMat& m, std::vector<int>& live, bool signed_sum) {
  if (live.empty()) return Rat(1);
  const int i0 = live.front();
  Rat total = 0;
  int sgn = 1;
  for (std::size_t k = 1; k < live.size(); ++k) {
    const int j = live[k];
    std::vector<int> rest;
    rest.reserve(live.size() - 2);
    for (std::size_t t = 1; t < live.size(); ++t)
      if (live[t] != j) rest.push_back(live[t]);
    Rat term = m[std::size_t(i0)][std::size_t(j)] * matching_sum(m, rest, signed_sum);
    total += signed_sum && sgn < 0 ? -term : term;
    sgn = -sgn;
  }
  return total;
}

inline std::vector<int> all_indices(std::size_t n) {
  std::vector<int> v(n);
  std::iota(v.begin(), v.end(), 0);
  return v;
}
}  // namespace detail

inline Rat pfaffian(const RatMat& m) {
  const std::size_t d = m.size();
  if (d % 2 != 0) throw std::domain_error("pfaffian: odd dimension");
  if (d > 12) throw std::domain_error("pfaffian: dimension > 12");
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j)
      if (m[i][j] != -m[j][i]) throw std::domain_error("pfaffian: input not skew");
  auto live = detail::all_indices(d);
  return detail::matching_sum(m, live, true);
}

// Diagonal entries are ignored (matchings never use them).
inline Rat hafnian(const RatMat& m) {
  const std::size_t d = m.size();
  if (d % 2 != 0) throw std::domain_error("hafnian: odd dimension");
  if (d > 12) throw std::domain_error("hafnian: dimension > 12");
  auto live = detail::all_indices(d);
  return detail::matching_sum(m, live, false);
}

// M[i][j] = lam_i^{floor(j/r)} * X[j mod r][i] (0-based), an rn x rn matrix.
template <class Mat>
Mat build_M_generic(const std::vector<typename Mat::value_type::value_type>& lam, const Mat& x,
                    int r) {
  const int rn = int(lam.size());
  if (int(x.size()) != r || (rn > 0 && int(x[0].size()) != rn))
    throw std::invalid_argument("build_M: X must be r x rn");
  Mat m(static_cast<std::size_t>(rn), typename Mat::value_type(static_cast<std::size_t>(rn)));
  for (int i = 0; i < rn; ++i) {
    auto pw = lam[std::size_t(i)];
    pw = 1;
    for (int j = 0; j < rn; ++j) {
      if (j > 0 && j % r == 0) pw = pw * lam[std::size_t(i)];
      m[std::size_t(i)][std::size_t(j)] = pw * x[std::size_t(j % r)][std::size_t(i)];
    }
  }
  return m;
}

inline RatMat build_M(const RatVec& lam, const RatMat& x, int r) {
  return build_M_generic<RatMat>(lam, x, r);
}

// Equipartition expansion of det M. Relative to ascending-concatenation block
// signs the expansion carries a fixed extra parity of C(r,2)*C(n,2) from the
// row-power vs column-block grid transpose.
inline Rat detM_via_expansion(const RatVec& lam, const RatMat& x, int r) {
  const int rn = int(lam.size());
  if (rn % r != 0) throw std::invalid_argument("detM_via_expansion: r must divide len(lambda)");
  const int n = rn / r;
  if (rn > 12) throw std::domain_error("detM_via_expansion: rn > 12");
  Rat total = 0;
  enumerate_equipartitions(r, n, [&](const EquiPartition& p) {
    Rat term = p.sign;
    for (int m = 0; m < r; ++m) {
      for (int i : p.blocks[std::size_t(m)]) term *= x[std::size_t(m)][std::size_t(i)];
      term *= vandermonde_subset(lam, p.blocks[std::size_t(m)]);
    }
    total += term;
  });
  long grid_parity = (long(r) * (r - 1) / 2) * (long(n) * (n - 1) / 2);
  return grid_parity % 2 ? Rat(-total) : total;
}

// --- identity catalog ---------------------------------------------------

struct IdentityReport {
  std::string identity;
  int size = 0;
  bool pass = false;
  std::string lhs, rhs;
  std::string note;
};

inline const std::vector<std::string>& identity_names() {
  static const std::vector<std::string> names = {
      "id-pfaff",        "quad-to-square", "quad-pfaffian", "quad-hafnian",
      "cauchy-sum",      "cauchy-cycle",   "sylvester",     "signed-exchange",
      "sign-split",      "pf-det-hf",      "detm-pfaffian"};
  return names;
}

namespace detail {

template <class F>
void for_subsets(int total, int k, F&& cb) {
  IndexSet s;
  std::function<void(int)> rec = [&](int start) {
    if (int(s.size()) == k) {
      cb(s);
      return;
    }
    for (int i = start; i <= total - (k - int(s.size())); ++i) {
      s.push_back(i);
      rec(i + 1);
      s.pop_back();
    }
  };
  rec(0);
}

inline int two_block_sign(const IndexSet& a, int total) {
  std::vector<int> p(a.begin(), a.end());
  IndexSet ac = complement_set(a, total);
  p.insert(p.end(), ac.begin(), ac.end());
  return perm_parity(p);
}

inline Rat sum_delta_pow(const RatVec& lam, long pow) {
  const int n2 = int(lam.size()), n = n2 / 2;
  Rat total = 0;
  for_subsets(n2, n, [&](const IndexSet& a) {
    IndexSet ac = complement_set(a, n2);
    total += rat_pow(vandermonde_subset(lam, a) * vandermonde_subset(lam, ac), pow);
  });
  return total;
}

inline RatMat cauchy_skew(const RatVec& lam) {
  const std::size_t d = lam.size();
  RatMat m = rat_zeros(int(d), int(d));
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j)
      if (i != j) m[i][j] = 1 / (lam[i] - lam[j]);
  return m;
}

inline void require_distinct(const RatVec& lam) {
  for (std::size_t i = 0; i < lam.size(); ++i)
    for (std::size_t j = i + 1; j < lam.size(); ++j)
      if (lam[i] == lam[j]) throw std::domain_error("identity check: repeated lambda");
}

template <class F>
void for_sized_partitions(const IndexSet& universe, const std::vector<int>& sizes,
                          std::vector<IndexSet>& acc, std::size_t b, F&& cb) {
  if (b == sizes.size()) {
    cb(acc);
    return;
  }
  std::vector<IndexSet> choices;
  for_subsets(int(universe.size()), sizes[b], [&](const IndexSet& pick) {
    IndexSet blk, rest;
    std::size_t k = 0;
    for (std::size_t i = 0; i < universe.size(); ++i) {
      if (k < pick.size() && int(i) == pick[k]) {
        blk.push_back(universe[i]);
        ++k;
      } else {
        rest.push_back(universe[i]);
      }
    }
    acc.push_back(blk);
    for_sized_partitions(rest, sizes, acc, b + 1, cb);
    acc.pop_back();
  });
}

}  // namespace detail

// Exact check of one catalog identity at the given evaluation points.
// size is n for the subset-sum identities, k for the cycle lemma, and the
// matrix dimension for the exchange identities. Auxiliary random data
// (matrices, subsets) is drawn from rng.
inline IdentityReport check_identity(const std::string& id, int size, const RatVec& lam,
                                     RngStream& rng) {
  using namespace detail;
  IdentityReport rep;
  rep.identity = id;
  rep.size = size;
  const int n = size;

  auto finish = [&](const Rat& lhs, const Rat& rhs) {
    rep.lhs = rat_str(lhs);
    rep.rhs = rat_str(rhs);
    rep.pass = (lhs == rhs);
    return rep;
  };

  if (id == "id-pfaff" || id == "quad-to-square" || id == "quad-pfaffian" ||
      id == "quad-hafnian" || id == "cauchy-sum" || id == "signed-exchange" ||
      id == "sign-split" || id == "pf-det-hf") {
    if (n < 1 || n > 4) throw std::domain_error("identity " + id + ": need 1 <= n <= 4");
    if (int(lam.size()) != 2 * n) throw std::invalid_argument("identity " + id + ": need 2n points");
    require_distinct(lam);
  }

  if (id == "id-pfaff") {
    Rat lhs = sum_delta_pow(lam, 2);
    Rat rhs = rat_pow(Rat(-2), n) * vandermonde(lam) * pfaffian(cauchy_skew(lam));
    return finish(lhs, rhs);
  }
  if (id == "quad-to-square") {
    Rat lhs = sum_delta_pow(lam, 4);
    Rat rhs = sum_delta_pow(lam, 2);
    return finish(lhs, rhs * rhs / rat_pow(Rat(2), n));
  }
  if (id == "quad-pfaffian") {
    Rat lhs = sum_delta_pow(lam, 4);
    Rat pf = pfaffian(cauchy_skew(lam));
    Rat d = vandermonde(lam);
    return finish(lhs, rat_pow(Rat(2), n) * d * d * pf * pf);
  }
  if (id == "quad-hafnian") {
    Rat lhs = sum_delta_pow(lam, 4);
    RatMat h = rat_zeros(2 * n, 2 * n);
    for (int i = 0; i < 2 * n; ++i)
      for (int j = 0; j < 2 * n; ++j)
        if (i != j) {
          Rat d = lam[std::size_t(i)] - lam[std::size_t(j)];
          h[std::size_t(i)][std::size_t(j)] = 1 / (d * d);
        }
    Rat d = vandermonde(lam);
    return finish(lhs, rat_pow(Rat(2), n) * d * d * hafnian(h));
  }
  if (id == "cauchy-sum") {
    // random feasible size profile (b1,..,b4), b_{9-i} = b_i, sum = n
    std::array<int, 4> b{};
    for (int t = 0; t < n; ++t) b[rng.bits() % 4]++;
    std::vector<int> sizes{b[0], b[1], b[2], b[3], b[3], b[2], b[1], b[0]};
    IndexSet universe = complement_set({}, 2 * n);
    Rat lhs = 0;
    std::vector<IndexSet> acc;
    for_sized_partitions(universe, sizes, acc, 0, [&](const std::vector<IndexSet>& blocks) {
      Rat term = 1;
      for (int j = 0; j < 4; ++j) {
        Rat c = cauchy_det(blocks[std::size_t(j)], blocks[std::size_t(7 - j)], lam);
        term *= c * c;
      }
      lhs += term;
    });
    Rat rhs = 0;
    for_subsets(2 * n, n, [&](const IndexSet& a) {
      Rat c = cauchy_det(a, complement_set(a, 2 * n), lam);
      rhs += c * c;
    });
    long mult = 1;
    {
      int placed = 0;
      for (int j = 0; j < 4; ++j)
        for (int k = 1; k <= b[std::size_t(j)]; ++k) mult = mult * (++placed) / k;
    }
    rep.note = "sizes " + std::to_string(b[0]) + "," + std::to_string(b[1]) + "," +
               std::to_string(b[2]) + "," + std::to_string(b[3]);
    return finish(lhs, Rat(mult) * rhs);
  }
  if (id == "cauchy-cycle") {
    const int k = size;
    if (k < 3 || k > 6) throw std::domain_error("cauchy-cycle: need 3 <= k <= 6");
    if (int(lam.size()) != k) throw std::invalid_argument("cauchy-cycle: need k points");
    require_distinct(lam);
    // sum over all k-cycles: orders of {1..k-1} after 0
    std::vector<int> tail(static_cast<std::size_t>(k - 1));
    std::iota(tail.begin(), tail.end(), 1);
    Rat lhs = 0;
    do {
      std::vector<int> cyc{0};
      cyc.insert(cyc.end(), tail.begin(), tail.end());
      Rat term = 1;
      for (int i = 0; i < k; ++i)
        term *= 1 / (lam[std::size_t(cyc[std::size_t(i)])] -
                     lam[std::size_t(cyc[std::size_t((i + 1) % k)])]);
      lhs += term;
    } while (std::next_permutation(tail.begin(), tail.end()));
    // full-permutation variant; equals k times the cycle sum
    std::vector<int> perm(static_cast<std::size_t>(k));
    std::iota(perm.begin(), perm.end(), 0);
    Rat full = 0;
    do {
      Rat term = 1;
      for (int i = 0; i < k; ++i)
        term *= 1 / (lam[std::size_t(perm[std::size_t(i)])] -
                     lam[std::size_t(perm[std::size_t((i + 1) % k)])]);
      full += term;
    } while (std::next_permutation(perm.begin(), perm.end()));
    rep.note = "full-permutation sum " + rat_str(full);
    rep.lhs = rat_str(lhs);
    rep.rhs = "0";
    rep.pass = (lhs == 0) && (full == 0);
    return rep;
  }
  if (id == "sylvester") {
    const int d = size;
    if (d < 2 || d > 6) throw std::domain_error("sylvester: need 2 <= dim <= 6");
    const int m = 1 + int(rng.bits() % std::uint64_t(d - 1));
    RatMat r1 = rat_zeros(d, d), r2 = rat_zeros(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        r1[std::size_t(i)][std::size_t(j)] = random_rat(rng, 9, 5, true);
        r2[std::size_t(i)][std::size_t(j)] = random_rat(rng, 9, 5, true);
      }
    IndexSet cols_i;
    {
      std::vector<int> all(static_cast<std::size_t>(d));
      std::iota(all.begin(), all.end(), 0);
      for (std::size_t i = all.size() - 1; i > 0; --i)
        std::swap(all[i], all[rng.bits() % std::uint64_t(i + 1)]);
      cols_i.assign(all.begin(), all.begin() + m);
      std::sort(cols_i.begin(), cols_i.end());
    }
    Rat lhs = det_exact(r1) * det_exact(r2);
    Rat rhs = 0;
    for_subsets(d, m, [&](const IndexSet& cols_j) {
      RatMat a = r1, b = r2;
      for (int t = 0; t < m; ++t)
        for (int row = 0; row < d; ++row) {
          a[std::size_t(row)][std::size_t(cols_i[std::size_t(t)])] =
              r2[std::size_t(row)][std::size_t(cols_j[std::size_t(t)])];
          b[std::size_t(row)][std::size_t(cols_j[std::size_t(t)])] =
              r1[std::size_t(row)][std::size_t(cols_i[std::size_t(t)])];
        }
      rhs += det_exact(a) * det_exact(b);
    });
    rep.note = "exchanged " + std::to_string(m) + " columns";
    return finish(lhs, rhs);
  }
  if (id == "signed-exchange") {
    // pick random A of size n and S subset of A
    IndexSet a;
    {
      std::vector<int> all(static_cast<std::size_t>(2 * n));
      std::iota(all.begin(), all.end(), 0);
      for (std::size_t i = all.size() - 1; i > 0; --i)
        std::swap(all[i], all[rng.bits() % std::uint64_t(i + 1)]);
      a.assign(all.begin(), all.begin() + n);
      std::sort(a.begin(), a.end());
    }
    const int na = int(rng.bits() % std::uint64_t(n + 1));
    IndexSet s(a.begin(), a.begin() + na);
    IndexSet ac = complement_set(a, 2 * n);
    Rat lhs = vandermonde_subset(lam, a) * vandermonde_subset(lam, ac);
    if ((n - na) % 2) lhs = -lhs;
    Rat sum = 0;
    for_subsets(2 * n, n, [&](const IndexSet& b) {
      IndexSet inter;
      std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(inter));
      if (inter != s) return;
      Rat term = vandermonde_subset(lam, b) *
                 vandermonde_subset(lam, complement_set(b, 2 * n));
      sum += Rat(two_block_sign(b, 2 * n)) * term;
    });
    Rat rhs = Rat(two_block_sign(a, 2 * n)) * sum;
    rep.note = "|S| = " + std::to_string(na);
    return finish(lhs, rhs);
  }
  if (id == "sign-split") {
    Rat d = vandermonde(lam);
    bool all_ok = true;
    Rat first_lhs = 0, first_rhs = 0;
    bool have = false;
    for_subsets(2 * n, n, [&](const IndexSet& a) {
      IndexSet ac = complement_set(a, 2 * n);
      Rat rhs = Rat(two_block_sign(a, 2 * n)) * vandermonde_subset(lam, a) *
                vandermonde_subset(lam, ac) * theta(a, ac, lam);
      if (n % 2) rhs = -rhs;
      if (!have) {
        first_lhs = d;
        first_rhs = rhs;
        have = true;
      }
      all_ok = all_ok && (rhs == d);
    });
    rep.lhs = rat_str(first_lhs);
    rep.rhs = rat_str(first_rhs);
    rep.pass = all_ok;
    rep.note = "checked all subsets";
    return rep;
  }
  if (id == "pf-det-hf") {
    RatMat k = cauchy_skew(lam);
    Rat pf = pfaffian(k);
    Rat dk = det_exact(k);
    RatMat h = rat_zeros(2 * n, 2 * n);
    for (int i = 0; i < 2 * n; ++i)
      for (int j = 0; j < 2 * n; ++j)
        if (i != j) {
          Rat d = lam[std::size_t(i)] - lam[std::size_t(j)];
          h[std::size_t(i)][std::size_t(j)] = 1 / (d * d);
        }
    Rat hf = hafnian(h);
    // random skew matrix check rides along
    RatMat sk = rat_zeros(2 * n, 2 * n);
    for (int i = 0; i < 2 * n; ++i)
      for (int j = i + 1; j < 2 * n; ++j) {
        sk[std::size_t(i)][std::size_t(j)] = random_rat(rng, 9, 5, true);
        sk[std::size_t(j)][std::size_t(i)] = -sk[std::size_t(i)][std::size_t(j)];
      }
    Rat pf2 = pfaffian(sk);
    bool extra = (pf2 * pf2 == det_exact(sk));
    rep.note = extra ? "random skew Pf^2 = det ok" : "random skew Pf^2 = det FAILED";
    rep.lhs = rat_str(pf * pf);
    rep.rhs = rat_str(dk);
    rep.pass = (pf * pf == dk) && (dk == hf) && extra;
    return rep;
  }
  if (id == "detm-pfaffian") {
    if (n < 1 || n > 4) throw std::domain_error("detm-pfaffian: need 1 <= n <= 4");
    if (int(lam.size()) != 2 * n)
      throw std::invalid_argument("detm-pfaffian: need 2n points");
    require_distinct(lam);
    RatVec roots;
    for (const auto& l : lam) {
      auto rt = rat_sqrt(l);
      if (!rt || *rt == 0)
        throw std::domain_error("detm-pfaffian: lambda must be positive perfect squares");
      roots.push_back(*rt);
    }
    RatMat q = rat_zeros(2, 2 * n);
    for (int i = 0; i < 2 * n; ++i) {
      q[0][std::size_t(i)] = random_rat(rng, 9, 5, true);
      q[1][std::size_t(i)] = random_rat(rng, 9, 5, true);
    }
    Rat lhs = det_exact(build_M(lam, q, 2));
    Rat pref = 1;
    for (int i = 0; i < 2 * n; ++i)
      for (int j = i + 1; j < 2 * n; ++j) pref *= roots[std::size_t(i)] + roots[std::size_t(j)];
    RatMat pm = rat_zeros(2 * n, 2 * n);
    for (int i = 0; i < 2 * n; ++i)
      for (int j = 0; j < 2 * n; ++j)
        if (i != j)
          pm[std::size_t(i)][std::size_t(j)] =
              (q[0][std::size_t(i)] * q[1][std::size_t(j)] -
               q[0][std::size_t(j)] * q[1][std::size_t(i)]) /
              (roots[std::size_t(i)] + roots[std::size_t(j)]);
    return finish(lhs, pref * pfaffian(pm));
  }
  throw std::domain_error("unknown identity: " + id);
}

// --- overlap conjecture -------------------------------------------------

struct ConjectureRow {
  std::array<int, 16> profile;
  std::string lhs, rhs;
  bool pass;
};

struct ConjectureReport {
  int n = 0;
  bool pass = false;
  std::vector<ConjectureRow> rows;
};

// Per-overlap-profile comparison of the quadruple Vandermonde sum against the
// closed form. Exhaustive over all quadruples of n-subsets of {0..2n-1};
// reports every profile that occurs (and the requested one even if empty).
inline ConjectureReport check_conjecture(int n, const RatVec& lam,
                                         const std::array<int, 16>* only_profile = nullptr) {
  if (n < 1 || n > 3) throw std::domain_error("check_conjecture: need 1 <= n <= 3");
  if (int(lam.size()) != 2 * n) throw std::invalid_argument("check_conjecture: need 2n points");
  detail::require_distinct(lam);
  const int n2 = 2 * n;

  std::vector<IndexSet> subs;
  detail::for_subsets(n2, n, [&](const IndexSet& s) { subs.push_back(s); });
  std::vector<std::uint32_t> masks;
  std::vector<Rat> dd;
  std::vector<int> sg;
  for (const auto& s : subs) {
    std::uint32_t m = 0;
    for (int i : s) m |= 1u << i;
    masks.push_back(m);
    dd.push_back(vandermonde_subset(lam, s) *
                 vandermonde_subset(lam, complement_set(s, n2)));
    sg.push_back(detail::two_block_sign(s, n2));
  }
  const std::uint32_t full = (1u << n2) - 1;

  std::map<std::array<int, 16>, Rat> prof_sum;
  const std::size_t ns = subs.size();
  for (std::size_t i1 = 0; i1 < ns; ++i1)
    for (std::size_t i2 = 0; i2 < ns; ++i2)
      for (std::size_t i3 = 0; i3 < ns; ++i3)
        for (std::size_t i4 = 0; i4 < ns; ++i4) {
          std::array<std::uint32_t, 4> am{masks[i1], masks[i2], masks[i3], masks[i4]};
          std::array<int, 16> xs{};
          for (int code = 15; code >= 0; --code) {
            std::uint32_t inter = full;
            for (int t = 0; t < 4; ++t) {
              bool take = (code >> (3 - t)) & 1;
              inter &= take ? am[std::size_t(t)] : (full & ~am[std::size_t(t)]);
            }
            xs[std::size_t(15 - code)] = std::popcount(inter);
          }
          Rat term = Rat(sg[i1] * sg[i2] * sg[i3] * sg[i4]) * dd[i1] * dd[i2] * dd[i3] * dd[i4];
          prof_sum[xs] += term;
        }

  Rat s44 = 0;
  for (const auto& d : dd) s44 += rat_pow(d, 4);

  ConjectureReport rep;
  rep.n = n;
  rep.pass = true;
  auto eval_rhs = [&](const std::array<int, 16>& xs) {
    bool sym = true;
    for (int i = 0; i < 16; ++i) sym = sym && (xs[std::size_t(i)] == xs[std::size_t(15 - i)]);
    if (!sym) return Rat(0);
    long mult = 1;
    {
      int placed = 0;
      for (int i = 0; i < 8; ++i)
        for (int k = 1; k <= xs[std::size_t(i)]; ++k) mult = mult * (++placed) / k;
    }
    Rat rhs = Rat(mult) * s44;
    if ((xs[1] + xs[2] + xs[4] + xs[7]) % 2) rhs = -rhs;
    return rhs;
  };
  auto add_row = [&](const std::array<int, 16>& xs, const Rat& lhs) {
    Rat rhs = eval_rhs(xs);
    ConjectureRow row{xs, rat_str(lhs), rat_str(rhs), lhs == rhs};
    rep.pass = rep.pass && row.pass;
    rep.rows.push_back(row);
  };
  if (only_profile) {
    auto it = prof_sum.find(*only_profile);
    add_row(*only_profile, it == prof_sum.end() ? Rat(0) : it->second);
  } else {
    for (const auto& [xs, lhs] : prof_sum) add_row(xs, lhs);
  }
  return rep;
}

}  // namespace blockbeta
