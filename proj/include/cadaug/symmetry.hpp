#pragma once

// Variables, permutations of the three variable names, and the six CAD
// variable orderings they act on.

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace cadaug {

inline constexpr int kNumVars = 3;
inline constexpr int kNumOrderings = 6;

/// One of the canonical variables x1, x2, x3.
class Variable {
public:
  constexpr Variable() = default;

  /// `index` is 1-based, as in the printed names.
  explicit constexpr Variable(int index) : pos_(index - 1) {
    if (index < 1 || index > kNumVars)
      throw std::out_of_range("variable index must be in 1..3");
  }

  static constexpr Variable from_pos(int pos) { return Variable(pos + 1); }

  constexpr int index() const { return pos_ + 1; }
  constexpr int pos() const { return pos_; }
  std::string name() const { return "x" + std::to_string(index()); }

  friend constexpr auto operator<=>(Variable, Variable) = default;

private:
  int pos_ = 0;
};

inline constexpr Variable x1{1};
inline constexpr Variable x2{2};
inline constexpr Variable x3{3};

/// A bijection on {x1, x2, x3}; an element of S3.
///
/// The six elements are enumerated in lexicographic order of their image
/// triple, so `VariablePermutation::from_index(k)` sends the ordering
/// x1 > x2 > x3 to ordering k.
class VariablePermutation {
public:
  constexpr VariablePermutation() : image_{0, 1, 2} {}

  /// `image[i]` is the 0-based position that variable i+1 is sent to.
  static VariablePermutation from_images(std::array<int, kNumVars> image);
  static VariablePermutation from_index(int index);
  static std::array<VariablePermutation, kNumOrderings> all();
  static VariablePermutation transposition(Variable a, Variable b);

  constexpr Variable operator()(Variable v) const {
    return Variable::from_pos(image_[static_cast<std::size_t>(v.pos())]);
  }

  /// (this ∘ inner)(v) = this(inner(v)).
  VariablePermutation compose(const VariablePermutation &inner) const;
  VariablePermutation inverse() const;
  bool is_identity() const { return image_ == std::array<std::uint8_t, 3>{0, 1, 2}; }

  /// Position in the canonical enumeration, 0..5.
  int index() const;
  /// Image digits, 1-based: the transposition x1<->x2 renders as "213".
  std::string to_string() const;
  static VariablePermutation parse(const std::string &text);

  friend bool operator==(const VariablePermutation &, const VariablePermutation &) = default;

private:
  std::array<std::uint8_t, kNumVars> image_;
};

/// A CAD variable ordering, encoded 0..5:
///   0: x1>x2>x3   1: x1>x3>x2   2: x2>x1>x3
///   3: x2>x3>x1   4: x3>x1>x2   5: x3>x2>x1
/// The first variable is the greatest one, eliminated first by projection.
class OrderingLabel {
public:
  constexpr OrderingLabel() = default;
  explicit OrderingLabel(int index);

  static OrderingLabel from_order(std::array<Variable, kNumVars> greatest_first);

  int index() const { return index_; }
  std::array<Variable, kNumVars> order() const;
  std::string to_string() const;

  /// Relabel under renaming: (a > b > c) becomes (σa > σb > σc).
  OrderingLabel permuted(const VariablePermutation &sigma) const;

  friend auto operator<=>(OrderingLabel, OrderingLabel) = default;

private:
  int index_ = 0;
};

} // namespace cadaug
