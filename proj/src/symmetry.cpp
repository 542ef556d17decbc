#include "cadaug/symmetry.hpp"

#include <algorithm>

namespace cadaug {

namespace {

constexpr std::array<std::array<int, kNumVars>, kNumOrderings> kTable = {{
    {0, 1, 2},
    {0, 2, 1},
    {1, 0, 2},
    {1, 2, 0},
    {2, 0, 1},
    {2, 1, 0},
}};

int table_index(const std::array<int, kNumVars> &row) {
  auto it = std::find(kTable.begin(), kTable.end(), row);
  if (it == kTable.end())
    throw std::invalid_argument("not a permutation of {x1,x2,x3}");
  return static_cast<int>(it - kTable.begin());
}

} // namespace

VariablePermutation VariablePermutation::from_images(std::array<int, kNumVars> image) {
  table_index(image); // validates bijectivity
  VariablePermutation p;
  for (std::size_t i = 0; i < kNumVars; ++i)
    p.image_[i] = static_cast<std::uint8_t>(image[i]);
  return p;
}

VariablePermutation VariablePermutation::from_index(int index) {
  if (index < 0 || index >= kNumOrderings)
    throw std::out_of_range("permutation index must be in 0..5");
  return from_images(kTable[static_cast<std::size_t>(index)]);
}

std::array<VariablePermutation, kNumOrderings> VariablePermutation::all() {
  std::array<VariablePermutation, kNumOrderings> out;
  for (int k = 0; k < kNumOrderings; ++k)
    out[static_cast<std::size_t>(k)] = from_index(k);
  return out;
}

VariablePermutation VariablePermutation::transposition(Variable a, Variable b) {
  std::array<int, kNumVars> image{0, 1, 2};
  std::swap(image[static_cast<std::size_t>(a.pos())], image[static_cast<std::size_t>(b.pos())]);
  return from_images(image);
}

VariablePermutation VariablePermutation::compose(const VariablePermutation &inner) const {
  VariablePermutation out;
  for (std::size_t i = 0; i < kNumVars; ++i)
    out.image_[i] = image_[inner.image_[i]];
  return out;
}

VariablePermutation VariablePermutation::inverse() const {
  VariablePermutation out;
  for (std::size_t i = 0; i < kNumVars; ++i)
    out.image_[image_[i]] = static_cast<std::uint8_t>(i);
  return out;
}

int VariablePermutation::index() const {
  return table_index({image_[0], image_[1], image_[2]});
}

std::string VariablePermutation::to_string() const {
  std::string s;
  for (auto i : image_)
    s.push_back(static_cast<char>('1' + i));
  return s;
}

VariablePermutation VariablePermutation::parse(const std::string &text) {
  if (text.size() != kNumVars)
    throw std::invalid_argument("bad permutation: " + text);
  std::array<int, kNumVars> image{};
  for (std::size_t i = 0; i < kNumVars; ++i) {
    if (text[i] < '1' || text[i] > '3')
      throw std::invalid_argument("bad permutation: " + text);
    image[i] = text[i] - '1';
  }
  return from_images(image);
}

OrderingLabel::OrderingLabel(int index) : index_(index) {
  if (index < 0 || index >= kNumOrderings)
    throw std::out_of_range("ordering label must be in 0..5");
}

OrderingLabel OrderingLabel::from_order(std::array<Variable, kNumVars> greatest_first) {
  std::array<int, kNumVars> row{};
  for (std::size_t i = 0; i < kNumVars; ++i)
    row[i] = greatest_first[i].pos();
  return OrderingLabel(table_index(row));
}

std::array<Variable, kNumVars> OrderingLabel::order() const {
  const auto &row = kTable[static_cast<std::size_t>(index_)];
  return {Variable::from_pos(row[0]), Variable::from_pos(row[1]), Variable::from_pos(row[2])};
}

std::string OrderingLabel::to_string() const {
  std::string s;
  for (auto v : order()) {
    if (!s.empty())
      s += ">";
    s += v.name();
  }
  return s;
}

OrderingLabel OrderingLabel::permuted(const VariablePermutation &sigma) const {
  auto o = order();
  for (auto &v : o)
    v = sigma(v);
  return from_order(o);
}

} // namespace cadaug
