#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace assoclearn {

/// Raised for malformed user input (bad shapes, invalid counts, bad files).
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// An effect index set k, stored as a bitmask over 0-based response indices.
/// The empty set is the overall effect, written {0}.
class Effect {
public:
    static constexpr int max_responses = 30;

    constexpr Effect() = default;
    explicit Effect(std::span<const int> responses);
    static constexpr Effect from_mask(std::uint32_t mask) { Effect e; e.mask_ = mask; return e; }

    constexpr std::uint32_t mask() const { return mask_; }
    constexpr bool is_overall() const { return mask_ == 0; }
    int order() const;
    bool contains(int response) const { return (mask_ >> response) & 1u; }
    constexpr bool is_subset_of(Effect other) const { return (mask_ & ~other.mask_) == 0; }

    /// Sorted 0-based member responses.
    std::vector<int> responses() const;

    /// "{0}" for the overall effect, otherwise "{1,3}" with 1-based indices.
    std::string to_string() const;

    constexpr bool operator==(const Effect&) const = default;

private:
    std::uint32_t mask_ = 0;
};

/// Order used across the library: ascending order, then lexicographic members.
bool effect_less(Effect a, Effect b);

/// Response shape J, maximum effect order d and the association index space.
class ResponseLayout {
public:
    /// Enumerates K = K_0 ∪ ... ∪ K_d. Throws InputError on J_l < 2 or d outside [0, q].
    static ResponseLayout build(std::vector<int> categories, int max_order);

    int num_responses() const { return static_cast<int>(categories_.size()); }
    int max_order() const { return max_order_; }
    const std::vector<int>& categories() const { return categories_; }

    /// |J|, the number of joint categories.
    int card() const { return card_; }

    const std::vector<Effect>& effects() const { return effects_; }
    int num_effects() const { return static_cast<int>(effects_.size()); }
    int dim(int effect_index) const { return dims_[effect_index]; }
    int offset(int effect_index) const { return offsets_[effect_index]; }
    int total_dim() const { return total_dim_; }

    /// Position of k in effects(), or -1.
    int index_of(Effect k) const;

    /// |k|_J = prod_{l in k} (J_l - 1).
    int effect_dim(Effect k) const;

    /// L_s for s = 0..q (independent of d).
    std::vector<int> order_dims() const;

    /// vec_J position of a 0-based category tuple (first response fastest).
    int cell_index(std::span<const int> cell) const;
    std::vector<int> cell_of(int index) const;

    bool operator==(const ResponseLayout&) const = default;

private:
    std::vector<int> categories_;
    int max_order_ = 0;
    int card_ = 1;
    std::vector<Effect> effects_;
    std::vector<int> dims_;
    std::vector<int> offsets_;
    int total_dim_ = 0;
};

/// A dense q-way array stored in row-major order (last index fastest).
class CategoryArray {
public:
    explicit CategoryArray(std::vector<int> shape);
    CategoryArray(std::vector<int> shape, std::vector<double> row_major);

    const std::vector<int>& shape() const { return shape_; }
    std::size_t size() const { return data_.size(); }

    double& at(std::span<const int> index);
    double at(std::span<const int> index) const;

    const std::vector<double>& row_major() const { return data_; }

    bool operator==(const CategoryArray&) const = default;

private:
    std::size_t flat(std::span<const int> index) const;

    std::vector<int> shape_;
    std::vector<double> data_;
};

/// Flatten with the first index varying fastest.
std::vector<double> vec_J(const ResponseLayout& layout, const CategoryArray& array);

/// Inverse of vec_J.
CategoryArray inv_vec_J(const ResponseLayout& layout, std::span<const double> v);

} // namespace assoclearn
