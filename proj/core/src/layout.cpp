#include "assoclearn/layout.hpp"

#include <algorithm>
#include <bit>
#include <numeric>

namespace assoclearn {

Effect::Effect(std::span<const int> responses) {
    for (int r : responses) {
        if (r < 0 || r >= max_responses) {
            throw InputError("effect member out of range: " + std::to_string(r + 1));
        }
        mask_ |= (1u << r);
    }
}

int Effect::order() const { return std::popcount(mask_); }

std::vector<int> Effect::responses() const {
    std::vector<int> out;
    for (int r = 0; r < max_responses; ++r) {
        if (contains(r)) out.push_back(r);
    }
    return out;
}

std::string Effect::to_string() const {
    if (is_overall()) return "{0}";
    std::string s = "{";
    bool first = true;
    for (int r : responses()) {
        if (!first) s += ",";
        s += std::to_string(r + 1);
        first = false;
    }
    return s + "}";
}

bool effect_less(Effect a, Effect b) {
    if (a.order() != b.order()) return a.order() < b.order();
    return a.responses() < b.responses();
}

ResponseLayout ResponseLayout::build(std::vector<int> categories, int max_order) {
    const int q = static_cast<int>(categories.size());
    if (q < 1) throw InputError("layout needs at least one response");
    if (q > Effect::max_responses) throw InputError("too many responses");
    for (std::size_t l = 0; l < categories.size(); ++l) {
        if (categories[l] < 2) {
            throw InputError("response " + std::to_string(l + 1) + " has " +
                             std::to_string(categories[l]) + " categories; need at least 2");
        }
    }
    if (max_order < 0 || max_order > q) {
        throw InputError("max order d=" + std::to_string(max_order) + " must lie in [0, " +
                         std::to_string(q) + "]");
    }

    ResponseLayout layout;
    layout.categories_ = std::move(categories);
    layout.max_order_ = max_order;
    long long card = 1;
    for (int j : layout.categories_) {
        card *= j;
        if (card > (1LL << 30)) throw InputError("|J| too large");
    }
    layout.card_ = static_cast<int>(card);

    for (std::uint32_t mask = 0; mask < (1u << q); ++mask) {
        if (std::popcount(mask) <= max_order) layout.effects_.push_back(Effect::from_mask(mask));
    }
    std::stable_sort(layout.effects_.begin(), layout.effects_.end(), effect_less);

    int offset = 0;
    for (Effect k : layout.effects_) {
        const int dim = layout.effect_dim(k);
        layout.dims_.push_back(dim);
        layout.offsets_.push_back(offset);
        offset += dim;
    }
    layout.total_dim_ = offset;
    return layout;
}

int ResponseLayout::index_of(Effect k) const {
    const auto it = std::find(effects_.begin(), effects_.end(), k);
    return it == effects_.end() ? -1 : static_cast<int>(it - effects_.begin());
}

int ResponseLayout::effect_dim(Effect k) const {
    int dim = 1;
    for (int r : k.responses()) {
        if (r >= num_responses()) throw InputError("effect " + k.to_string() + " outside layout");
        dim *= categories_[r] - 1;
    }
    return dim;
}

std::vector<int> ResponseLayout::order_dims() const {
    const int q = num_responses();
    std::vector<int> dims(q + 1, 0);
    for (std::uint32_t mask = 0; mask < (1u << q); ++mask) {
        const Effect k = Effect::from_mask(mask);
        dims[k.order()] += effect_dim(k);
    }
    return dims;
}

int ResponseLayout::cell_index(std::span<const int> cell) const {
    if (static_cast<int>(cell.size()) != num_responses()) {
        throw InputError("category tuple has wrong length");
    }
    int index = 0;
    int stride = 1;
    for (int l = 0; l < num_responses(); ++l) {
        if (cell[l] < 0 || cell[l] >= categories_[l]) {
            throw InputError("category " + std::to_string(cell[l] + 1) + " out of range for response " +
                             std::to_string(l + 1));
        }
        index += cell[l] * stride;
        stride *= categories_[l];
    }
    return index;
}

std::vector<int> ResponseLayout::cell_of(int index) const {
    if (index < 0 || index >= card_) throw InputError("cell index out of range");
    std::vector<int> cell(categories_.size());
    for (std::size_t l = 0; l < categories_.size(); ++l) {
        cell[l] = index % categories_[l];
        index /= categories_[l];
    }
    return cell;
}

CategoryArray::CategoryArray(std::vector<int> shape) : shape_(std::move(shape)) {
    std::size_t n = 1;
    for (int s : shape_) {
        if (s < 1) throw InputError("array extent must be positive");
        n *= static_cast<std::size_t>(s);
    }
    data_.assign(n, 0.0);
}

CategoryArray::CategoryArray(std::vector<int> shape, std::vector<double> row_major)
    : CategoryArray(std::move(shape)) {
    if (row_major.size() != data_.size()) throw InputError("array data does not match shape");
    data_ = std::move(row_major);
}

std::size_t CategoryArray::flat(std::span<const int> index) const {
    if (index.size() != shape_.size()) throw InputError("array index has wrong rank");
    std::size_t f = 0;
    for (std::size_t a = 0; a < shape_.size(); ++a) {
        if (index[a] < 0 || index[a] >= shape_[a]) throw InputError("array index out of range");
        f = f * static_cast<std::size_t>(shape_[a]) + static_cast<std::size_t>(index[a]);
    }
    return f;
}

double& CategoryArray::at(std::span<const int> index) { return data_[flat(index)]; }
double CategoryArray::at(std::span<const int> index) const { return data_[flat(index)]; }

std::vector<double> vec_J(const ResponseLayout& layout, const CategoryArray& array) {
    if (array.shape() != layout.categories()) throw InputError("array shape does not match J");
    std::vector<double> v(static_cast<std::size_t>(layout.card()));
    for (int i = 0; i < layout.card(); ++i) {
        const auto cell = layout.cell_of(i);
        v[i] = array.at(cell);
    }
    return v;
}

CategoryArray inv_vec_J(const ResponseLayout& layout, std::span<const double> v) {
    if (static_cast<int>(v.size()) != layout.card()) {
        throw InputError("vector length " + std::to_string(v.size()) + " does not match |J|=" +
                         std::to_string(layout.card()));
    }
    CategoryArray array(layout.categories());
    for (int i = 0; i < layout.card(); ++i) {
        const auto cell = layout.cell_of(i);
        array.at(cell) = v[i];
    }
    return array;
}

} // namespace assoclearn
