// permutation.hpp -- combinatorial data of interval exchanges: permutation
// pairs, irreducibility, the translation matrix, the singularity permutation
// with its orbit structure and kernel basis, rotation-type detection and the
// two Rauzy moves.
#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "renorm/smallmat.hpp"

namespace renorm {

// pi0, pi1 map symbol index -> position in 1..d (top and bottom rows).
class Permutation {
public:
    Permutation() = default;

    Permutation(std::vector<int> pi0, std::vector<int> pi1,
                std::vector<std::string> alphabet = {})
        : pi0_(std::move(pi0)), pi1_(std::move(pi1)), alphabet_(std::move(alphabet)) {
        if (alphabet_.empty()) {
            for (std::size_t i = 0; i < pi0_.size(); ++i)
                alphabet_.push_back(std::string(1, static_cast<char>('A' + i)));
        }
        validate();
    }

    // permutation from the monodromy p = pi1 o pi0^{-1}, with pi0 = id
    static Permutation fromMonodromy(const std::vector<int>& p) {
        std::vector<int> pi0(p.size()), pi1(p.size());
        for (std::size_t i = 0; i < p.size(); ++i) {
            pi0[i] = static_cast<int>(i) + 1;
            pi1[i] = p[i];
        }
        return Permutation(pi0, pi1);
    }

    int d() const { return static_cast<int>(pi0_.size()); }
    const std::vector<std::string>& alphabet() const { return alphabet_; }
    const std::vector<int>& pi0() const { return pi0_; }
    const std::vector<int>& pi1() const { return pi1_; }

    int top(int symbol) const { return pi0_[symbol]; }
    int bottom(int symbol) const { return pi1_[symbol]; }

    // symbol at a given 1-based position
    int symbolAtTop(int pos) const { return inv(pi0_, pos); }
    int symbolAtBottom(int pos) const { return inv(pi1_, pos); }

    // monodromy acting on positions: p(i) = pi1(pi0^{-1}(i))
    int monodromy(int i) const { return pi1_[symbolAtTop(i)]; }

    bool irreducible() const {
        int maxSeen = 0;
        for (int k = 1; k < d(); ++k) {
            maxSeen = std::max(maxSeen, monodromy(k));
            if (maxSeen == k) return false;
        }
        return true;
    }

    IMat translationMatrix() const {
        IMat omega(d(), d());
        for (int a = 0; a < d(); ++a)
            for (int b = 0; b < d(); ++b) {
                if (pi1_[a] > pi1_[b] && pi0_[a] < pi0_[b])
                    omega(a, b) = 1;
                else if (pi1_[a] < pi1_[b] && pi0_[a] > pi0_[b])
                    omega(a, b) = -1;
            }
        return omega;
    }

    // shift k with p(i) - 1 = i + k (mod d) for all i, when it exists
    std::optional<int> rotationShift() const {
        for (int k = 0; k <= d() - 2; ++k) {
            bool ok = true;
            for (int i = 1; i <= d(); ++i)
                if (monodromy(i) != (i + k) % d() + 1) {
                    ok = false;
                    break;
                }
            if (ok) return k;
        }
        return std::nullopt;
    }

    // Rauzy move of the given type. Type 0 keeps the top row and reinserts
    // the bottom-last symbol after the top-last one; type 1 is symmetric.
    Permutation rauzyMove(int eps) const {
        int winner = eps == 0 ? symbolAtTop(d()) : symbolAtBottom(d());
        int loser = eps == 0 ? symbolAtBottom(d()) : symbolAtTop(d());
        if (winner == loser) throw std::logic_error("rauzyMove: degenerate permutation");
        std::vector<int> p0 = pi0_, p1 = pi1_;
        auto& moved = eps == 0 ? p1 : p0;
        int k = moved[winner];
        for (int s = 0; s < d(); ++s)
            if (s != loser && moved[s] > k && moved[s] < d()) ++moved[s];
        moved[loser] = k + 1;
        return Permutation(p0, p1, alphabet_);
    }

    bool operator==(const Permutation& o) const { return pi0_ == o.pi0_ && pi1_ == o.pi1_; }
    bool operator!=(const Permutation& o) const { return !(*this == o); }
    bool operator<(const Permutation& o) const {
        return pi0_ != o.pi0_ ? pi0_ < o.pi0_ : pi1_ < o.pi1_;
    }

private:
    static int inv(const std::vector<int>& pi, int pos) {
        for (std::size_t s = 0; s < pi.size(); ++s)
            if (pi[s] == pos) return static_cast<int>(s);
        throw std::out_of_range("permutation position");
    }

    void validate() const {
        int n = d();
        if (n < 2) throw std::invalid_argument("permutation needs d >= 2");
        if (static_cast<int>(pi1_.size()) != n || static_cast<int>(alphabet_.size()) != n)
            throw std::invalid_argument("permutation row sizes differ");
        for (const auto* row : {&pi0_, &pi1_}) {
            std::vector<bool> seen(n, false);
            for (int v : *row) {
                if (v < 1 || v > n || seen[v - 1])
                    throw std::invalid_argument("row is not a bijection onto 1..d");
                seen[v - 1] = true;
            }
        }
    }

    std::vector<int> pi0_, pi1_;
    std::vector<std::string> alphabet_;
};

// Orbit structure of the singularity permutation sigma on {0..d}. Orbits are
// listed by smallest element, so the orbit through 0 always comes first; the
// 1-based orbit index is the singularity label used by the boundary operator.
struct SingularityStructure {
    std::vector<int> sigma;                 // size d+1
    std::vector<std::vector<int>> orbits;   // cycles, each sorted, ordered by min element
    int kappa = 0;
    std::vector<std::vector<long long>> kernelBasis;  // one vector per orbit without 0
    std::vector<int> orbitIndex;            // endpoint j -> 0-based orbit id

    int singularityOf(int endpoint) const { return orbitIndex[endpoint]; }
};

inline SingularityStructure singularityStructure(const Permutation& p) {
    if (!p.irreducible()) throw std::invalid_argument("sigma needs an irreducible permutation");
    int d = p.d();
    std::vector<int> pinv(d + 1);
    for (int i = 1; i <= d; ++i) pinv[p.monodromy(i)] = i;

    SingularityStructure s;
    s.sigma.assign(d + 1, 0);
    s.sigma[0] = pinv[1] - 1;
    for (int j = 1; j <= d; ++j) {
        int pj = p.monodromy(j);
        s.sigma[j] = pj == d ? d : pinv[pj + 1] - 1;
    }

    std::vector<bool> seen(d + 1, false);
    s.orbitIndex.assign(d + 1, -1);
    for (int j = 0; j <= d; ++j) {
        if (seen[j]) continue;
        std::vector<int> cycle;
        int x = j;
        while (!seen[x]) {
            seen[x] = true;
            cycle.push_back(x);
            x = s.sigma[x];
        }
        std::sort(cycle.begin(), cycle.end());
        for (int e : cycle) s.orbitIndex[e] = static_cast<int>(s.orbits.size());
        s.orbits.push_back(std::move(cycle));
    }
    s.kappa = static_cast<int>(s.orbits.size());

    for (const auto& orbit : s.orbits) {
        if (orbit.front() == 0) continue;
        std::set<int> in(orbit.begin(), orbit.end());
        std::vector<long long> v(d, 0);
        for (int j = 1; j <= d; ++j) {
            bool self = in.count(j) > 0, prev = in.count(j - 1) > 0;
            if (self == prev) continue;
            v[p.symbolAtTop(j)] = self ? 1 : -1;
        }
        s.kernelBasis.push_back(std::move(v));
    }
    return s;
}

inline int kernelDimension(const Permutation& p) {
    return p.d() - integerRank(p.translationMatrix());
}

// sigma for rotation-type data in closed form; cross-checks the generic one
inline std::vector<int> rotationTypeSigma(int d, int k) {
    std::vector<int> sigma(d + 1);
    for (int j = 0; j <= d; ++j) sigma[j] = j;
    sigma[0] = d - k - 1;
    sigma[d - k - 1] = d;
    sigma[d] = 0;
    return sigma;
}

inline std::vector<Permutation> allIrreducible(int d) {
    std::vector<int> p(d);
    for (int i = 0; i < d; ++i) p[i] = i + 1;
    std::vector<Permutation> out;
    do {
        Permutation perm = Permutation::fromMonodromy(p);
        if (perm.irreducible()) out.push_back(perm);
    } while (std::next_permutation(p.begin(), p.end()));
    return out;
}

}  // namespace renorm
