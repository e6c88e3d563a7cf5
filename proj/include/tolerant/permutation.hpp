#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>

#include "tolerant/errors.hpp"
#include "tolerant/rng.hpp"

namespace tolerant {

using Label = std::uint8_t;

inline constexpr int kMaxAlphabet = 16;

/// Permutation of [Q] = {0, ..., Q-1}, stored as its image list.
class Permutation {
 public:
  Permutation() = default;

  static Permutation identity(int q) {
    check_size(q);
    Permutation p;
    p.q_ = static_cast<std::uint8_t>(q);
    for (int i = 0; i < q; ++i) p.image_[i] = static_cast<Label>(i);
    return p;
  }

  /// The swap of labels 0 and 1 on [2]; the parity constraint.
  static Permutation transposition() {
    Permutation p = identity(2);
    std::swap(p.image_[0], p.image_[1]);
    return p;
  }

  /// Throws UsageError unless `image` is a bijection of [image.size()].
  static Permutation from_image(std::span<const Label> image) {
    int q = static_cast<int>(image.size());
    check_size(q);
    std::array<bool, kMaxAlphabet> seen{};
    Permutation p;
    p.q_ = static_cast<std::uint8_t>(q);
    for (int i = 0; i < q; ++i) {
      if (image[i] >= q || seen[image[i]]) throw UsageError("image list is not a permutation");
      seen[image[i]] = true;
      p.image_[i] = image[i];
    }
    return p;
  }

  static Permutation random(int q, Rng& rng) {
    Permutation p = identity(q);
    for (int i = q - 1; i > 0; --i)
      std::swap(p.image_[i], p.image_[uniform_index(rng, static_cast<std::uint64_t>(i) + 1)]);
    return p;
  }

  int size() const noexcept { return q_; }
  Label operator()(Label b) const { return image_[b]; }
  std::span<const Label> image() const noexcept { return {image_.data(), q_}; }

  Permutation inverse() const {
    Permutation p;
    p.q_ = q_;
    for (int i = 0; i < q_; ++i) p.image_[image_[i]] = static_cast<Label>(i);
    return p;
  }

  bool is_identity() const {
    for (int i = 0; i < q_; ++i)
      if (image_[i] != i) return false;
    return true;
  }

  /// Lexicographic rank in [0, Q!), used to index group-lifted kernels.
  std::size_t rank() const {
    std::size_t r = 0;
    for (int i = 0; i < q_; ++i) {
      std::size_t smaller_later = 0;
      for (int j = i + 1; j < q_; ++j) smaller_later += image_[j] < image_[i];
      r = r * static_cast<std::size_t>(q_ - i) + smaller_later;
    }
    return r;
  }

  static Permutation unrank(int q, std::size_t r) {
    check_size(q);
    std::array<std::size_t, kMaxAlphabet> digits{};
    for (int i = q - 1; i >= 0; --i) {
      std::size_t base = static_cast<std::size_t>(q - i);
      digits[i] = r % base;
      r /= base;
    }
    std::array<Label, kMaxAlphabet> pool{};
    for (int i = 0; i < q; ++i) pool[i] = static_cast<Label>(i);
    int remaining = q;
    Permutation p;
    p.q_ = static_cast<std::uint8_t>(q);
    for (int i = 0; i < q; ++i) {
      std::size_t d = digits[i];
      p.image_[i] = pool[d];
      std::copy(pool.begin() + static_cast<std::ptrdiff_t>(d) + 1, pool.begin() + remaining,
                pool.begin() + static_cast<std::ptrdiff_t>(d));
      --remaining;
    }
    return p;
  }

  std::string to_string() const {
    std::string s = "[";
    for (int i = 0; i < q_; ++i) {
      if (i) s += ' ';
      s += std::to_string(image_[i]);
    }
    return s + "]";
  }

  friend bool operator==(const Permutation& a, const Permutation& b) {
    return a.q_ == b.q_ && std::equal(a.image_.begin(), a.image_.begin() + a.q_, b.image_.begin());
  }

 private:
  static void check_size(int q) {
    if (q < 1 || q > kMaxAlphabet) throw UsageError("alphabet size out of range");
  }

  std::array<Label, kMaxAlphabet> image_{};
  std::uint8_t q_ = 0;
};

/// (outer o inner)(b) = outer(inner(b)): apply `inner` first.
inline Permutation compose(const Permutation& outer, const Permutation& inner) {
  if (outer.size() != inner.size()) throw UsageError("composing permutations of different size");
  std::array<Label, kMaxAlphabet> img{};
  for (int i = 0; i < inner.size(); ++i) img[i] = outer(inner(static_cast<Label>(i)));
  return Permutation::from_image({img.data(), static_cast<std::size_t>(inner.size())});
}

inline std::size_t factorial(int q) {
  std::size_t f = 1;
  for (int i = 2; i <= q; ++i) f *= static_cast<std::size_t>(i);
  return f;
}

}  // namespace tolerant
