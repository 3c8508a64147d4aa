#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace spinwell {

// Single-particle modes: internal state (e or g) in the left or right well.
enum class Mode : int { eL = 0, gL = 1, eR = 2, gR = 3 };

inline constexpr std::array<Mode, 4> all_modes = {Mode::eL, Mode::gL, Mode::eR,
                                                  Mode::gR};

inline const char* mode_name(Mode m) {
  switch (m) {
    case Mode::eL: return "eL";
    case Mode::gL: return "gL";
    case Mode::eR: return "eR";
    case Mode::gR: return "gR";
  }
  return "?";
}

// Occupation-number state |n_eL, n_gL, n_eR, n_gR>.
struct FockState {
  std::array<int, 4> n{};

  int& operator[](Mode m) { return n[static_cast<std::size_t>(m)]; }
  int operator[](Mode m) const { return n[static_cast<std::size_t>(m)]; }

  int total() const { return n[0] + n[1] + n[2] + n[3]; }
  int left() const { return n[0] + n[1]; }
  int right() const { return n[2] + n[3]; }
  int excited() const { return n[0] + n[2]; }

  friend bool operator==(const FockState&, const FockState&) = default;
};

inline std::string to_string(const FockState& s) {
  return "(" + std::to_string(s.n[0]) + "," + std::to_string(s.n[1]) + "," +
         std::to_string(s.n[2]) + "," + std::to_string(s.n[3]) + ")";
}

inline std::int64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  if (k > n - k) k = n - k;
  std::int64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

struct Hop {
  FockState state;
  double amplitude;
};

// Matrix element of a†_dst a_src on |s>: moves one particle and carries the
// bosonic factor sqrt(n_src (n_dst + 1)). Empty result when the source mode is
// unoccupied (the operator annihilates the state).
inline std::optional<Hop> hop_element(const FockState& s, Mode src, Mode dst) {
  if (src == dst) throw std::invalid_argument("hop_element: src == dst");
  const int n_src = s[src];
  if (n_src == 0) return std::nullopt;
  FockState t = s;
  t[src] -= 1;
  t[dst] += 1;
  const double amp = std::sqrt(static_cast<double>(n_src) *
                               static_cast<double>(s[dst] + 1));
  return Hop{t, amp};
}

// Number-conserving four-mode basis at fixed total N. States are ordered
// lexicographically on (n_eL, n_gL, n_eR), largest occupation first, so that
// (N,0,0,0) has rank 0; n_gR is determined by the total. Ranks are computed
// combinatorially, no hashing involved, so indices are reproducible across
// runs and languages.
class Basis {
 public:
  static constexpr int default_max_atoms = 40;

  explicit Basis(int n_atoms, int max_atoms = default_max_atoms)
      : n_atoms_(n_atoms) {
    if (n_atoms < 0) throw std::invalid_argument("Basis: negative atom number");
    if (n_atoms > max_atoms)
      throw std::invalid_argument("Basis: N = " + std::to_string(n_atoms) +
                                  " exceeds the configured cap " +
                                  std::to_string(max_atoms));
    states_.reserve(static_cast<std::size_t>(binomial(n_atoms + 3, 3)));
    for (int a = n_atoms; a >= 0; --a)
      for (int b = n_atoms - a; b >= 0; --b)
        for (int c = n_atoms - a - b; c >= 0; --c)
          states_.push_back(FockState{{a, b, c, n_atoms - a - b - c}});
  }

  int atoms() const { return n_atoms_; }
  std::size_t size() const { return states_.size(); }
  const FockState& state(std::size_t i) const { return states_[i]; }
  const std::vector<FockState>& states() const { return states_; }

  // Index of s in the declared ordering; inverse of state().
  std::size_t rank(const FockState& s) const {
    for (int occ : s.n)
      if (occ < 0)
        throw std::invalid_argument("rank: negative occupation in " +
                                    to_string(s));
    if (s.total() != n_atoms_)
      throw std::invalid_argument(
          "rank: state " + to_string(s) + " sums to " +
          std::to_string(s.total()) + ", basis holds N = " +
          std::to_string(n_atoms_));
    const int N = n_atoms_;
    const int a = s.n[0], b = s.n[1], c = s.n[2];
    // predecessors with larger n_eL, then larger n_gL at equal n_eL, then
    // larger n_eR at equal (n_eL, n_gL)
    std::int64_t r = 0;
    for (int e = a + 1; e <= N; ++e) r += binomial(N - e + 2, 2);
    for (int g = b + 1; g <= N - a; ++g) r += (N - a - g + 1);
    r += (N - a - b) - c;
    return static_cast<std::size_t>(r);
  }

 private:
  int n_atoms_;
  std::vector<FockState> states_;
};

inline Basis enumerate_basis(int n_atoms,
                             int max_atoms = Basis::default_max_atoms) {
  return Basis(n_atoms, max_atoms);
}

}  // namespace spinwell
