#pragma once

// Toy-image transform zoo: tiny 4x4 images, a handful of augmentation
// families (rotations, flips, color maps, jigsaw, blur, concatenation),
// and exact joints over (C, S, Abar, A, X) built by enumeration. Small
// enough that every synergy number is a closed-book fact.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "synergy/errors.hpp"
#include "synergy/info.hpp"
#include "synergy/joint_table.hpp"

namespace synergy {

inline constexpr int kGridSide = 4;
inline constexpr int kPixelCount = kGridSide * kGridSide;
inline constexpr int kPixelValues = 4;  // 0 = background, 1..3 = colors

// Row-major 4x4 grid of small pixel values.
struct ToyImage {
    std::array<int, kPixelCount> px{};

    int at(int r, int c) const { return px[r * kGridSide + c]; }
    void set(int r, int c, int v) { px[r * kGridSide + c] = v; }

    void validate() const {
        for (int v : px)
            if (v < 0 || v >= kPixelValues)
                throw model_error("ToyImage: pixel value out of range");
    }

    // base-4 digit string, row major; doubles as the X symbol
    std::string str() const {
        std::string s;
        s.reserve(kPixelCount);
        for (int v : px) s.push_back(static_cast<char>('0' + v));
        return s;
    }

    bool operator==(const ToyImage& o) const { return px == o.px; }
    bool operator<(const ToyImage& o) const { return px < o.px; }
};

// 90 degrees clockwise; four applications give the identity back.
inline ToyImage rotate90(const ToyImage& in) {
    ToyImage out;
    for (int r = 0; r < kGridSide; ++r)
        for (int c = 0; c < kGridSide; ++c) out.set(r, c, in.at(kGridSide - 1 - c, r));
    return out;
}

inline ToyImage rotate(const ToyImage& in, int quarter_turns) {
    ToyImage out = in;
    for (int i = 0; i < ((quarter_turns % 4) + 4) % 4; ++i) out = rotate90(out);
    return out;
}

inline ToyImage hflip_image(const ToyImage& in) {
    ToyImage out;
    for (int r = 0; r < kGridSide; ++r)
        for (int c = 0; c < kGridSide; ++c) out.set(r, c, in.at(r, kGridSide - 1 - c));
    return out;
}

inline ToyImage vflip_image(const ToyImage& in) {
    ToyImage out;
    for (int r = 0; r < kGridSide; ++r)
        for (int c = 0; c < kGridSide; ++c) out.set(r, c, in.at(kGridSide - 1 - r, c));
    return out;
}

// Binary mask from a 16-bit pattern, bit r*4+c set = pixel on.
inline ToyImage mask_from_bits(std::uint16_t bits) {
    ToyImage m;
    for (int i = 0; i < kPixelCount; ++i) m.px[i] = (bits >> i) & 1;
    return m;
}

inline ToyImage paint(const ToyImage& mask, int color) {
    if (color <= 0 || color >= kPixelValues) throw config_error("paint: color outside palette");
    ToyImage out;
    for (int i = 0; i < kPixelCount; ++i) out.px[i] = mask.px[i] ? color : 0;
    return out;
}

// ---- datasets ---------------------------------------------------------------

struct ShapeSpec {
    std::string class_name;
    std::vector<std::uint16_t> masks;  // class-defining binary patterns
};

struct DatasetSpec {
    std::vector<ShapeSpec> classes;
    std::vector<int> styles = {1, 2, 3};      // color palette (the S channel)
    std::vector<int> poses = {0};             // intrinsic quarter-turns (the Abar channel)
    std::vector<double> class_weights = {};   // empty = uniform over classes
};

// One generative combination (class, shape, style, pose), materialized.
struct DatasetItem {
    std::size_t class_index = 0;
    std::size_t shape_index = 0;
    int style = 0;
    int pose = 0;
    double weight = 0.0;
    ToyImage image;  // rotate(mask, pose) painted with style
};

struct ToyDataset {
    std::vector<std::string> class_names;
    std::vector<int> styles;
    std::vector<int> poses;
    std::vector<DatasetItem> items;

    Alphabet class_alphabet() const { return Alphabet{"C", class_names}; }
    Alphabet style_alphabet() const {
        std::vector<std::string> syms;
        for (int s : styles) syms.push_back(std::to_string(s));
        return Alphabet{"S", syms};
    }
    Alphabet pose_alphabet() const {
        static const char* kAngle[4] = {"0", "90", "180", "270"};
        std::vector<std::string> syms;
        for (int p : poses) syms.push_back(kAngle[p]);
        return Alphabet{"Abar", syms};
    }
};

// Validates a dataset description and materializes every combination.
// The seed is accepted for interface stability; construction is fully
// deterministic, so it currently has nothing left to decide.
inline ToyDataset build_toy_dataset(const DatasetSpec& spec, std::uint64_t /*seed*/ = 0) {
    if (spec.classes.size() < 2) throw config_error("dataset: need at least two classes");
    if (spec.styles.empty()) throw config_error("dataset: empty style palette");
    if (spec.poses.empty()) throw config_error("dataset: empty pose set");
    for (int s : spec.styles)
        if (s <= 0 || s >= kPixelValues) throw config_error("dataset: style outside palette");
    for (int p : spec.poses)
        if (p < 0 || p > 3) throw config_error("dataset: pose must be a quarter-turn count 0..3");
    if (std::set<int>(spec.styles.begin(), spec.styles.end()).size() != spec.styles.size())
        throw config_error("dataset: duplicate style");
    if (std::set<int>(spec.poses.begin(), spec.poses.end()).size() != spec.poses.size())
        throw config_error("dataset: duplicate pose");

    std::set<std::string> seen_names;
    std::set<std::uint16_t> seen_masks;
    for (const auto& cls : spec.classes) {
        if (!seen_names.insert(cls.class_name).second)
            throw config_error("dataset: duplicate class name '" + cls.class_name + "'");
        if (cls.masks.empty()) throw config_error("dataset: class '" + cls.class_name + "' has no shapes");
        for (std::uint16_t m : cls.masks)
            if (!seen_masks.insert(m).second)
                throw config_error("dataset: shapes must be distinct across classes");
    }

    std::vector<double> cw = spec.class_weights;
    if (cw.empty()) cw.assign(spec.classes.size(), 1.0 / spec.classes.size());
    if (cw.size() != spec.classes.size()) throw config_error("dataset: one weight per class expected");
    double total = 0.0;
    for (double w : cw) {
        if (w < 0.0) throw config_error("dataset: negative class weight");
        total += w;
    }
    if (std::abs(total - 1.0) > kNormalizationTol)
        throw config_error("dataset: class weights must sum to 1");

    ToyDataset ds;
    ds.styles = spec.styles;
    ds.poses = spec.poses;
    for (std::size_t ci = 0; ci < spec.classes.size(); ++ci) {
        const auto& cls = spec.classes[ci];
        ds.class_names.push_back(cls.class_name);
        const double w = cw[ci] / (cls.masks.size() * spec.styles.size() * spec.poses.size());
        for (std::size_t si = 0; si < cls.masks.size(); ++si)
            for (int style : spec.styles)
                for (int pose : spec.poses) {
                    DatasetItem item;
                    item.class_index = ci;
                    item.shape_index = si;
                    item.style = style;
                    item.pose = pose;
                    item.weight = w;
                    item.image = paint(rotate(mask_from_bits(cls.masks[si]), pose), style);
                    ds.items.push_back(item);
                }
    }
    return ds;
}

// Shipped default: two tee orientations that are each other's 180-degree
// rotation (and vertical mirror), plus a centered square that every
// symmetry fixes. All three masks are left-right symmetric. This is what
// makes the family ranking interesting: rotations and vertical flips
// collide across the tee classes (high synergy), horizontal flips are
// pure lossiness (zero synergy), and the square class keeps rotation
// prediction ambiguous even given X.
inline ToyDataset default_toy_dataset() {
    DatasetSpec spec;
    spec.classes = {
        {"tee_up", {0x066F}},    // top row + centered 2x2 block
        {"tee_down", {0xF660}},  // bottom row + centered 2x2 block
        {"square", {0x0660}},    // centered 2x2 block alone
    };
    spec.styles = {1, 2, 3};
    spec.poses = {0};
    spec.class_weights = {0.4, 0.4, 0.2};
    return build_toy_dataset(spec);
}

// Aggressive style augmentation: every item repainted with the first
// palette color, weights merged for combinations that now coincide.
inline ToyDataset collapse_styles(const ToyDataset& ds) {
    ToyDataset out;
    out.class_names = ds.class_names;
    out.styles = {ds.styles.front()};
    out.poses = ds.poses;
    std::map<std::tuple<std::size_t, std::size_t, int>, DatasetItem> merged;
    for (const auto& item : ds.items) {
        DatasetItem copy = item;
        copy.style = out.styles.front();
        for (int i = 0; i < kPixelCount; ++i)
            if (copy.image.px[i] != 0) copy.image.px[i] = copy.style;
        auto key = std::make_tuple(copy.class_index, copy.shape_index, copy.pose);
        auto [it, fresh] = merged.emplace(key, copy);
        if (!fresh) it->second.weight += copy.weight;
    }
    for (const auto& [key, item] : merged) out.items.push_back(item);
    return out;
}

// ---- transform families -----------------------------------------------------

struct TransformFamily {
    std::string name;
    Alphabet action_space;  // named "A"
    std::function<ToyImage(const ToyImage&, std::size_t)> action;
    // X symbol for (image, action); defaults to the transformed grid string,
    // direct_concat overrides it to carry the action alongside the raw grid
    std::function<std::string(const ToyImage&, std::size_t)> observe;
    // real-vector encoding of the observation, used by gradient-trained
    // encoders; must be a function of the observe() symbol. Defaults to the
    // transformed grid's pixel values scaled to [0,1]; direct_concat appends
    // a one-hot of the action to match its richer observation
    std::function<std::vector<double>(const ToyImage&, std::size_t)> featurize;
};

namespace detail {

inline std::vector<std::array<int, 4>> quadrant_permutations() {
    std::vector<std::array<int, 4>> perms;
    std::array<int, 4> p = {0, 1, 2, 3};
    do {
        perms.push_back(p);
    } while (std::next_permutation(p.begin(), p.end()));
    return perms;
}

// Quadrant q covers rows (q/2)*2.., cols (q%2)*2..; output quadrant q is
// filled with source quadrant perm[q].
inline ToyImage permute_quadrants(const ToyImage& in, const std::array<int, 4>& perm) {
    ToyImage out;
    for (int q = 0; q < 4; ++q) {
        const int dr = (q / 2) * 2, dc = (q % 2) * 2;
        const int sr = (perm[q] / 2) * 2, sc = (perm[q] % 2) * 2;
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c) out.set(dr + r, dc + c, in.at(sr + r, sc + c));
    }
    return out;
}

// Average over the in-bounds part of a neighborhood, rounded to the
// nearest pixel value.
inline ToyImage blur_with(const ToyImage& in, const std::vector<std::pair<int, int>>& offsets) {
    ToyImage out;
    for (int r = 0; r < kGridSide; ++r)
        for (int c = 0; c < kGridSide; ++c) {
            double sum = 0.0;
            int n = 0;
            for (auto [dr, dc] : offsets) {
                const int rr = r + dr, cc = c + dc;
                if (rr < 0 || rr >= kGridSide || cc < 0 || cc >= kGridSide) continue;
                sum += in.at(rr, cc);
                ++n;
            }
            out.set(r, c, static_cast<int>(std::lround(sum / n)));
        }
    return out;
}

inline ToyImage global_mean(const ToyImage& in) {
    double sum = 0.0;
    for (int v : in.px) sum += v;
    ToyImage out;
    out.px.fill(static_cast<int>(std::lround(sum / kPixelCount)));
    return out;
}

}  // namespace detail

inline std::vector<std::string> all_family_names() {
    return {"rotation4", "hflip",   "vflip", "grayscale",     "invert",
            "jigsaw4",   "blur4",   "direct_concat", "instance"};
}

inline TransformFamily make_family(const std::string& name) {
    TransformFamily f;
    f.name = name;
    if (name == "rotation4") {
        f.action_space = Alphabet{"A", {"0", "90", "180", "270"}};
        f.action = [](const ToyImage& img, std::size_t a) { return rotate(img, static_cast<int>(a)); };
    } else if (name == "hflip") {
        f.action_space = Alphabet{"A", {"id", "flip"}};
        f.action = [](const ToyImage& img, std::size_t a) { return a ? hflip_image(img) : img; };
    } else if (name == "vflip") {
        f.action_space = Alphabet{"A", {"id", "flip"}};
        f.action = [](const ToyImage& img, std::size_t a) { return a ? vflip_image(img) : img; };
    } else if (name == "grayscale") {
        f.action_space = Alphabet{"A", {"id", "gray"}};
        f.action = [](const ToyImage& img, std::size_t a) {
            if (!a) return img;
            ToyImage out = img;
            for (int& v : out.px)
                if (v > 0) v = 1;
            return out;
        };
    } else if (name == "invert") {
        f.action_space = Alphabet{"A", {"id", "invert"}};
        f.action = [](const ToyImage& img, std::size_t a) {
            if (!a) return img;
            ToyImage out = img;
            for (int& v : out.px)
                if (v > 0) v = kPixelValues - v;
            return out;
        };
    } else if (name == "jigsaw4") {
        static const auto perms = detail::quadrant_permutations();
        std::vector<std::string> syms;
        for (std::size_t i = 0; i < perms.size(); ++i) syms.push_back(std::to_string(i));
        f.action_space = Alphabet{"A", syms};
        f.action = [](const ToyImage& img, std::size_t a) {
            return detail::permute_quadrants(img, perms[a]);
        };
    } else if (name == "blur4") {
        f.action_space = Alphabet{"A", {"none", "box", "plus", "global"}};
        f.action = [](const ToyImage& img, std::size_t a) {
            switch (a) {
                case 0: return img;
                case 1: return detail::blur_with(img, {{0, 0}, {0, 1}, {1, 0}, {1, 1}});
                case 2: return detail::blur_with(img, {{0, 0}, {-1, 0}, {1, 0}, {0, -1}, {0, 1}});
                default: return detail::global_mean(img);
            }
        };
    } else if (name == "direct_concat") {
        f.action_space = Alphabet{"A", {"0", "1", "2", "3"}};
        f.action = [](const ToyImage& img, std::size_t) { return img; };
        f.observe = [](const ToyImage& img, std::size_t a) {
            return img.str() + "|" + std::to_string(a);
        };
        f.featurize = [](const ToyImage& img, std::size_t a) {
            std::vector<double> v;
            v.reserve(kPixelCount + 4);
            for (int p : img.px) v.push_back(p / double(kPixelValues - 1));
            for (std::size_t k = 0; k < 4; ++k) v.push_back(k == a ? 1.0 : 0.0);
            return v;
        };
    } else if (name == "instance") {
        // no augmentation at all; the identity family used when the
        // instance index itself is the prediction target
        f.action_space = Alphabet{"A", {"0"}};
        f.action = [](const ToyImage& img, std::size_t) { return img; };
    } else {
        throw name_error("make_family: unknown family '" + name + "'");
    }
    if (!f.observe)
        f.observe = [action = f.action](const ToyImage& img, std::size_t a) {
            ToyImage out = action(img, a);
            out.validate();
            return out.str();
        };
    if (!f.featurize)
        f.featurize = [action = f.action](const ToyImage& img, std::size_t a) {
            const ToyImage out = action(img, a);
            std::vector<double> v;
            v.reserve(kPixelCount);
            for (int p : out.px) v.push_back(p / double(kPixelValues - 1));
            return v;
        };
    return f;
}

// ---- joints and reports -----------------------------------------------------

// Exact joint over (C, S, Abar, A, X) with A uniform on the action space
// and X merged across generative combinations that produce the same
// observation. Independence of A from the generative side is checked
// rather than assumed.
inline JointTable apply_transform_family(const ToyDataset& ds, const TransformFamily& family) {
    if (ds.items.empty()) throw usage_error("apply_transform_family: empty dataset");
    const std::size_t n_actions = family.action_space.size();

    std::set<std::string> x_symbols;
    for (const auto& item : ds.items)
        for (std::size_t a = 0; a < n_actions; ++a) x_symbols.insert(family.observe(item.image, a));

    const Alphabet c_alpha = ds.class_alphabet();
    const Alphabet s_alpha = ds.style_alphabet();
    const Alphabet abar_alpha = ds.pose_alphabet();
    const Alphabet x_alpha{"X", std::vector<std::string>(x_symbols.begin(), x_symbols.end())};

    const auto style_pos = [&ds](int style) {
        return static_cast<std::size_t>(std::find(ds.styles.begin(), ds.styles.end(), style) -
                                        ds.styles.begin());
    };
    const auto pose_pos = [&ds](int pose) {
        return static_cast<std::size_t>(std::find(ds.poses.begin(), ds.poses.end(), pose) -
                                        ds.poses.begin());
    };

    const std::size_t nx = x_alpha.size();
    std::vector<double> p(c_alpha.size() * s_alpha.size() * abar_alpha.size() * n_actions * nx, 0.0);
    for (const auto& item : ds.items)
        for (std::size_t a = 0; a < n_actions; ++a) {
            const std::string obs = family.observe(item.image, a);
            const std::size_t xi = x_alpha.index_of(obs);
            std::size_t cell = item.class_index;
            cell = cell * s_alpha.size() + style_pos(item.style);
            cell = cell * abar_alpha.size() + pose_pos(item.pose);
            cell = cell * n_actions + a;
            cell = cell * nx + xi;
            p[cell] += item.weight / n_actions;
        }

    JointTable joint({c_alpha, s_alpha, abar_alpha, family.action_space, x_alpha}, std::move(p));
    if (mutual_information(joint, {"A"}, {"C"}) > kIdentityTol)
        throw numerical_error("apply_transform_family: action correlates with class");
    return joint;
}

struct SynergyReport {
    double h_a = 0.0;
    double h_a_given_x = 0.0;
    double h_a_given_xc = 0.0;
    double synergy = 0.0;  // I(A;C|X)
    bool lossy = false;
    bool class_relevant = false;
};

inline constexpr double kLossyTol = 1e-9;
inline constexpr double kClassRelevantFraction = 0.5;

inline SynergyReport synergy_report(const JointTable& joint, const std::string& a = "A",
                                    const std::string& c = "C", const std::string& x = "X",
                                    double fraction = kClassRelevantFraction) {
    SynergyReport r;
    r.h_a = entropy(joint, {a});
    r.h_a_given_x = conditional_entropy(joint, {a}, {x});
    r.h_a_given_xc = conditional_entropy(joint, {a}, {x, c});
    r.synergy = conditional_mutual_information(joint, {a}, {c}, {x});
    if (std::abs(r.synergy - (r.h_a_given_x - r.h_a_given_xc)) > kIdentityTol)
        throw numerical_error("synergy_report: entropy-difference route disagrees");
    r.lossy = r.h_a_given_x > kLossyTol;
    r.class_relevant = r.synergy / std::max(r.h_a_given_x, 1e-12) >= fraction;
    return r;
}

struct StyleProbe {
    double i_a_s_given_x = 0.0;
    double i_a_c_given_x = 0.0;
    double collapsed_i_a_s_given_x = 0.0;  // after mapping all styles to one
    double collapsed_i_a_c_given_x = 0.0;
};

inline StyleProbe style_shortcut_probe(const ToyDataset& ds, const TransformFamily& family) {
    if (ds.styles.size() < 2)
        throw usage_error("style_shortcut_probe: needs at least two styles");
    const JointTable joint = apply_transform_family(ds, family);
    StyleProbe r;
    r.i_a_s_given_x = conditional_mutual_information(joint, {"A"}, {"S"}, {"X"});
    r.i_a_c_given_x = conditional_mutual_information(joint, {"A"}, {"C"}, {"X"});
    const JointTable collapsed = apply_transform_family(collapse_styles(ds), family);
    r.collapsed_i_a_s_given_x = conditional_mutual_information(collapsed, {"A"}, {"S"}, {"X"});
    r.collapsed_i_a_c_given_x = conditional_mutual_information(collapsed, {"A"}, {"C"}, {"X"});
    return r;
}

struct InstanceReport {
    std::size_t n_instances = 0;  // distinct raw grids; the effective action space
    double h_i = 0.0;
    double h_i_given_x = 0.0;
    double h_i_given_xc = 0.0;
    double synergy = 0.0;  // I(I;C|X)
};

// Role swap for instance discrimination: the identity of the raw grid
// becomes the prediction target, the family provides the augmentations.
inline InstanceReport instance_discrimination_synergy(const ToyDataset& ds,
                                                      const TransformFamily& family) {
    if (ds.items.empty()) throw usage_error("instance_discrimination_synergy: empty dataset");

    std::map<std::string, std::size_t> instance_of;  // raw grid -> instance index
    for (const auto& item : ds.items) instance_of.emplace(item.image.str(), 0);
    std::size_t next = 0;
    for (auto& [grid, idx] : instance_of) idx = next++;

    std::set<std::string> x_symbols;
    const std::size_t n_actions = family.action_space.size();
    for (const auto& item : ds.items)
        for (std::size_t a = 0; a < n_actions; ++a) x_symbols.insert(family.observe(item.image, a));

    std::vector<std::string> i_syms;
    for (std::size_t i = 0; i < instance_of.size(); ++i) i_syms.push_back(std::to_string(i));
    const Alphabet i_alpha{"I", i_syms};
    const Alphabet c_alpha = ds.class_alphabet();
    const Alphabet x_alpha{"X", std::vector<std::string>(x_symbols.begin(), x_symbols.end())};

    std::vector<double> p(i_alpha.size() * c_alpha.size() * x_alpha.size(), 0.0);
    for (const auto& item : ds.items) {
        const std::size_t ii = instance_of.at(item.image.str());
        for (std::size_t a = 0; a < n_actions; ++a) {
            const std::size_t xi = x_alpha.index_of(family.observe(item.image, a));
            p[(ii * c_alpha.size() + item.class_index) * x_alpha.size() + xi] +=
                item.weight / n_actions;
        }
    }
    const JointTable joint({i_alpha, c_alpha, x_alpha}, std::move(p));

    InstanceReport r;
    r.n_instances = instance_of.size();
    r.h_i = entropy(joint, {"I"});
    r.h_i_given_x = conditional_entropy(joint, {"I"}, {"X"});
    r.h_i_given_xc = conditional_entropy(joint, {"I"}, {"X", "C"});
    r.synergy = conditional_mutual_information(joint, {"I"}, {"C"}, {"X"});
    return r;
}

}  // namespace synergy
