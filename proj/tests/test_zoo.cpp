#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "oracle.hpp"
#include "synergy/encoder.hpp"
#include "synergy/info.hpp"
#include "synergy/zoo.hpp"

using namespace synergy;

namespace {

const double kLn2 = std::log(2.0);

// Independent 90-degree rotation for oracle construction: a permutation
// of flat indices built from the coordinate map, not the library routine.
std::array<int, kPixelCount> rot90_perm() {
    std::array<int, kPixelCount> perm{};
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) perm[r * 4 + c] = (3 - c) * 4 + r;
    return perm;
}

std::string rotate_string(std::string grid, int turns) {
    static const auto perm = rot90_perm();
    for (int t = 0; t < turns; ++t) {
        std::string next(kPixelCount, '0');
        for (int i = 0; i < kPixelCount; ++i) next[i] = grid[perm[i]];
        grid = next;
    }
    return grid;
}

double map_entropy(const std::map<std::string, double>& w) {
    double h = 0.0;
    for (const auto& [k, p] : w)
        if (p > 0.0) h -= p * std::log(p);
    return h;
}

}  // namespace

TEST_CASE("image primitives") {
    ToyImage img;
    for (int i = 0; i < kPixelCount; ++i) img.px[i] = i % kPixelValues;

    SECTION("rotations and flips compose correctly") {
        CHECK(rotate(img, 4) == img);
        CHECK(rotate90(rotate90(rotate90(rotate90(img)))) == img);
        CHECK(hflip_image(hflip_image(img)) == img);
        CHECK(vflip_image(vflip_image(img)) == img);
        CHECK(hflip_image(vflip_image(img)) == rotate(img, 2));
        CHECK(rotate_string(img.str(), 1) == rotate90(img).str());
        CHECK(rotate_string(img.str(), 3) == rotate(img, 3).str());
    }

    SECTION("grid strings are base-4 digits") {
        const std::string s = img.str();
        REQUIRE(s.size() == kPixelCount);
        for (char ch : s) CHECK((ch >= '0' && ch <= '3'));
    }

    SECTION("pixel range is enforced") {
        ToyImage bad;
        bad.px[5] = 7;
        CHECK_THROWS_AS(bad.validate(), model_error);
        CHECK_THROWS_AS(paint(mask_from_bits(0x0660), 0), config_error);
        CHECK_THROWS_AS(paint(mask_from_bits(0x0660), 4), config_error);
    }

    SECTION("mask bits land on the right pixels") {
        const ToyImage m = mask_from_bits(0x066F);
        CHECK(m.at(0, 0) == 1);
        CHECK(m.at(0, 3) == 1);
        CHECK(m.at(1, 1) == 1);
        CHECK(m.at(2, 2) == 1);
        CHECK(m.at(3, 0) == 0);
        CHECK(m.at(1, 0) == 0);
    }
}

TEST_CASE("default dataset shape") {
    const ToyDataset ds = default_toy_dataset();

    SECTION("three classes, nine items, weights sum to one") {
        REQUIRE(ds.class_names == std::vector<std::string>{"tee_up", "tee_down", "square"});
        REQUIRE(ds.items.size() == 9);
        double total = 0.0;
        std::set<std::string> grids;
        for (const auto& item : ds.items) {
            total += item.weight;
            grids.insert(item.image.str());
        }
        CHECK_THAT(total, Catch::Matchers::WithinAbs(1.0, 1e-12));
        CHECK(grids.size() == 9);  // every (class, style) grid is distinct
    }

    SECTION("the tee classes mirror each other; everything is hflip-symmetric") {
        std::map<std::pair<std::size_t, int>, ToyImage> by_class_style;
        for (const auto& item : ds.items) by_class_style[{item.class_index, item.style}] = item.image;
        for (int style : {1, 2, 3}) {
            CHECK(vflip_image(by_class_style[{0, style}]) == by_class_style[{1, style}]);
            CHECK(rotate(by_class_style[{0, style}], 2) == by_class_style[{1, style}]);
            for (std::size_t cls : {0u, 1u, 2u})
                CHECK(hflip_image(by_class_style[{cls, style}]) == by_class_style[{cls, style}]);
        }
    }

    SECTION("construction is deterministic") {
        const ToyDataset again = default_toy_dataset();
        REQUIRE(again.items.size() == ds.items.size());
        for (std::size_t i = 0; i < ds.items.size(); ++i) {
            CHECK(again.items[i].image == ds.items[i].image);
            CHECK(again.items[i].weight == ds.items[i].weight);
        }
    }
}

TEST_CASE("dataset validation") {
    DatasetSpec spec;
    spec.classes = {{"a", {0x00FF}}, {"b", {0xFF00}}};

    CHECK_NOTHROW(build_toy_dataset(spec));

    SECTION("size and duplicate rules") {
        DatasetSpec one;
        one.classes = {{"solo", {0x00FF}}};
        CHECK_THROWS_AS(build_toy_dataset(one), config_error);

        DatasetSpec dup = spec;
        dup.classes[1].masks = {0x00FF};
        CHECK_THROWS_AS(build_toy_dataset(dup), config_error);

        DatasetSpec same_name = spec;
        same_name.classes[1].class_name = "a";
        CHECK_THROWS_AS(build_toy_dataset(same_name), config_error);
    }

    SECTION("palette, pose, and weight rules") {
        DatasetSpec bad = spec;
        bad.styles = {0};
        CHECK_THROWS_AS(build_toy_dataset(bad), config_error);
        bad = spec;
        bad.styles = {1, 1};
        CHECK_THROWS_AS(build_toy_dataset(bad), config_error);
        bad = spec;
        bad.poses = {5};
        CHECK_THROWS_AS(build_toy_dataset(bad), config_error);
        bad = spec;
        bad.class_weights = {0.5, 0.6};
        CHECK_THROWS_AS(build_toy_dataset(bad), config_error);
        bad = spec;
        bad.class_weights = {1.0};
        CHECK_THROWS_AS(build_toy_dataset(bad), config_error);
    }

    SECTION("two classes, one shape, three colors: six raw images") {
        const ToyDataset ds = build_toy_dataset(spec);
        CHECK(ds.items.size() == 6);
        std::set<std::string> grids;
        for (const auto& item : ds.items) grids.insert(item.image.str());
        CHECK(grids.size() == 6);
    }
}

TEST_CASE("family catalogue") {
    for (const auto& name : all_family_names()) {
        const TransformFamily f = make_family(name);
        CHECK(f.name == name);
        CHECK(f.action_space.size() >= 1);
        CHECK(f.action_space.name == "A");
    }
    CHECK(make_family("rotation4").action_space.size() == 4);
    CHECK(make_family("jigsaw4").action_space.size() == 24);
    CHECK(make_family("instance").action_space.size() == 1);
    CHECK_THROWS_AS(make_family("zoom"), name_error);
}

TEST_CASE("joint structure and action independence") {
    const ToyDataset ds = default_toy_dataset();
    for (const auto& name : all_family_names()) {
        INFO(name);
        const JointTable joint = apply_transform_family(ds, make_family(name));
        REQUIRE(joint.vars().size() == 5);
        CHECK(joint.vars()[0].name == "C");
        CHECK(joint.vars()[1].name == "S");
        CHECK(joint.vars()[2].name == "Abar");
        CHECK(joint.vars()[3].name == "A");
        CHECK(joint.vars()[4].name == "X");
        CHECK(mutual_information(joint, {"A"}, {"C"}) <= 1e-10);
        CHECK(mutual_information(joint, {"A"}, {"S"}) <= 1e-10);
    }
}

TEST_CASE("rotation carries class-dependent ambiguity") {
    const ToyDataset ds = default_toy_dataset();
    const JointTable joint = apply_transform_family(ds, make_family("rotation4"));
    const SynergyReport r = synergy_report(joint);

    // tee support (0.8 prior): two (class, angle) explanations per image;
    // square support (0.2): all four angles coincide
    CHECK_THAT(r.h_a, Catch::Matchers::WithinAbs(2.0 * kLn2, 1e-12));
    CHECK_THAT(r.h_a_given_x, Catch::Matchers::WithinAbs(1.2 * kLn2, 1e-12));
    CHECK_THAT(r.h_a_given_xc, Catch::Matchers::WithinAbs(0.4 * kLn2, 1e-12));
    CHECK_THAT(r.synergy, Catch::Matchers::WithinAbs(0.8 * kLn2, 1e-12));
    CHECK(r.lossy);
    CHECK(r.class_relevant);

    SECTION("independent oracle agrees") {
        oracle::Dist d;
        for (const auto& item : ds.items)
            for (int a = 0; a < 4; ++a)
                d.push_back({{{"C", std::to_string(item.class_index)},
                              {"A", std::to_string(a)},
                              {"X", rotate_string(item.image.str(), a)}},
                             item.weight / 4.0});
        CHECK_THAT(r.synergy,
                   Catch::Matchers::WithinAbs(oracle::cmi(d, {"A"}, {"C"}, {"X"}), 1e-12));
        CHECK_THAT(r.h_a_given_x,
                   Catch::Matchers::WithinAbs(oracle::cond_entropy(d, {"A"}, {"X"}), 1e-12));
    }

    SECTION("fully symmetric shapes erase the angle signal entirely") {
        DatasetSpec sym;
        sym.classes = {{"square", {0x0660}}, {"frame", {0xFFFF}}};
        const JointTable j = apply_transform_family(build_toy_dataset(sym), make_family("rotation4"));
        const SynergyReport sr = synergy_report(j);
        CHECK_THAT(sr.h_a_given_x, Catch::Matchers::WithinAbs(2.0 * kLn2, 1e-12));
        CHECK_THAT(sr.synergy, Catch::Matchers::WithinAbs(0.0, 1e-12));
    }
}

TEST_CASE("flips split into class-relevant and pure-lossy") {
    const ToyDataset ds = default_toy_dataset();

    const SynergyReport v = synergy_report(apply_transform_family(ds, make_family("vflip")));
    CHECK_THAT(v.h_a_given_x, Catch::Matchers::WithinAbs(kLn2, 1e-12));
    CHECK_THAT(v.synergy, Catch::Matchers::WithinAbs(0.8 * kLn2, 1e-12));
    CHECK(v.lossy);
    CHECK(v.class_relevant);

    // every default mask is left-right symmetric, so hflip is invisible:
    // maximal lossiness, zero class relevance
    const SynergyReport h = synergy_report(apply_transform_family(ds, make_family("hflip")));
    CHECK_THAT(h.h_a_given_x, Catch::Matchers::WithinAbs(kLn2, 1e-12));
    CHECK_THAT(h.h_a_given_xc, Catch::Matchers::WithinAbs(kLn2, 1e-12));
    CHECK_THAT(h.synergy, Catch::Matchers::WithinAbs(0.0, 1e-12));
    CHECK(h.lossy);
    CHECK_FALSE(h.class_relevant);
}

TEST_CASE("color families") {
    const ToyDataset ds = default_toy_dataset();

    SECTION("grayscale is lossy only through the color-1 ambiguity") {
        const SynergyReport r = synergy_report(apply_transform_family(ds, make_family("grayscale")));
        const double h_quarter = 2.0 * kLn2 - 0.75 * std::log(3.0);  // H(Bernoulli 1/4)
        CHECK_THAT(r.h_a_given_x, Catch::Matchers::WithinAbs(2.0 / 3.0 * h_quarter, 1e-12));
        CHECK_THAT(r.synergy, Catch::Matchers::WithinAbs(0.0, 1e-12));
        CHECK(r.lossy);
        CHECK_FALSE(r.class_relevant);
    }

    SECTION("grayscale with gray-free palette is fully detectable") {
        DatasetSpec spec;
        spec.classes = {{"tee_up", {0x066F}}, {"tee_down", {0xF660}}, {"square", {0x0660}}};
        spec.styles = {2, 3};
        spec.class_weights = {0.4, 0.4, 0.2};
        const SynergyReport r =
            synergy_report(apply_transform_family(build_toy_dataset(spec), make_family("grayscale")));
        CHECK_THAT(r.h_a_given_x, Catch::Matchers::WithinAbs(0.0, 1e-12));
        CHECK_FALSE(r.lossy);
        CHECK_THAT(r.synergy, Catch::Matchers::WithinAbs(0.0, 1e-12));
    }

    SECTION("invert is ambiguous everywhere but style resolves it") {
        const SynergyReport r = synergy_report(apply_transform_family(ds, make_family("invert")));
        CHECK_THAT(r.h_a_given_x, Catch::Matchers::WithinAbs(kLn2, 1e-12));
        CHECK_THAT(r.synergy, Catch::Matchers::WithinAbs(0.0, 1e-12));
        CHECK(r.lossy);
        CHECK_FALSE(r.class_relevant);
    }
}

TEST_CASE("style shortcut probe") {
    const ToyDataset ds = default_toy_dataset();

    SECTION("invert leaks style, not class") {
        const StyleProbe p = style_shortcut_probe(ds, make_family("invert"));
        CHECK_THAT(p.i_a_s_given_x, Catch::Matchers::WithinAbs(2.0 / 3.0 * kLn2, 1e-12));
        CHECK_THAT(p.i_a_c_given_x, Catch::Matchers::WithinAbs(0.0, 1e-12));
        CHECK_THAT(p.collapsed_i_a_s_given_x, Catch::Matchers::WithinAbs(0.0, 1e-12));
        CHECK_THAT(p.collapsed_i_a_c_given_x, Catch::Matchers::WithinAbs(0.0, 1e-12));
    }

    SECTION("rotation commutes with recoloring") {
        const StyleProbe p = style_shortcut_probe(ds, make_family("rotation4"));
        CHECK_THAT(p.i_a_s_given_x, Catch::Matchers::WithinAbs(0.0, 1e-12));
        CHECK_THAT(p.i_a_c_given_x, Catch::Matchers::WithinAbs(0.8 * kLn2, 1e-12));
        CHECK_THAT(p.collapsed_i_a_c_given_x,
                   Catch::Matchers::WithinAbs(p.i_a_c_given_x, 1e-10));
    }

    SECTION("a singleton palette cannot be probed") {
        DatasetSpec spec;
        spec.classes = {{"a", {0x00FF}}, {"b", {0xFF00}}};
        spec.styles = {2};
        CHECK_THROWS_AS(style_shortcut_probe(build_toy_dataset(spec), make_family("invert")),
                        usage_error);
    }
}

TEST_CASE("structural families") {
    const ToyDataset ds = default_toy_dataset();

    SECTION("jigsaw tiles are all distinct, so nothing is lost") {
        const SynergyReport r = synergy_report(apply_transform_family(ds, make_family("jigsaw4")));
        CHECK_THAT(r.h_a, Catch::Matchers::WithinAbs(std::log(24.0), 1e-12));
        CHECK_THAT(r.h_a_given_x, Catch::Matchers::WithinAbs(0.0, 1e-12));
        CHECK_THAT(r.synergy, Catch::Matchers::WithinAbs(0.0, 1e-12));
        CHECK_FALSE(r.lossy);
        CHECK_FALSE(r.class_relevant);
    }

    SECTION("direct concatenation is perfectly equivariant") {
        const SynergyReport r =
            synergy_report(apply_transform_family(ds, make_family("direct_concat")));
        CHECK_THAT(r.h_a, Catch::Matchers::WithinAbs(2.0 * kLn2, 1e-12));
        CHECK(r.h_a_given_x <= 1e-12);
        CHECK(r.h_a_given_xc <= 1e-12);
        CHECK(r.synergy <= 1e-12);
        CHECK_FALSE(r.lossy);
        CHECK_FALSE(r.class_relevant);
    }

    SECTION("blur actions stay inside the pixel alphabet") {
        const JointTable joint = apply_transform_family(ds, make_family("blur4"));
        const SynergyReport r = synergy_report(joint);
        CHECK(r.h_a <= 2.0 * kLn2 + 1e-12);
        CHECK(r.synergy >= 0.0);
        CHECK(r.h_a_given_x >= r.h_a_given_xc - 1e-12);
    }
}

TEST_CASE("feature encodings track the observation") {
    const ToyDataset ds = default_toy_dataset();
    const ToyImage& img = ds.items.front().image;

    SECTION("the default encoding is the transformed grid, scaled to [0,1]") {
        const TransformFamily rot = make_family("rotation4");
        for (std::size_t a = 0; a < rot.action_space.size(); ++a) {
            const std::vector<double> v = rot.featurize(img, a);
            const ToyImage moved = rot.action(img, a);
            REQUIRE(v.size() == kPixelCount);
            for (std::size_t p = 0; p < kPixelCount; ++p) {
                CHECK(v[p] == moved.px[p] / double(kPixelValues - 1));
                CHECK(v[p] >= 0.0);
                CHECK(v[p] <= 1.0);
            }
        }
    }

    SECTION("direct concatenation appends a one-hot of the action") {
        const TransformFamily cat = make_family("direct_concat");
        const std::vector<double> v = cat.featurize(img, 2);
        REQUIRE(v.size() == kPixelCount + 4);
        for (std::size_t p = 0; p < kPixelCount; ++p)
            CHECK(v[p] == img.px[p] / double(kPixelValues - 1));
        CHECK(v[kPixelCount + 2] == 1.0);
        CHECK(v[kPixelCount] + v[kPixelCount + 1] + v[kPixelCount + 3] == 0.0);
    }
}

TEST_CASE("bijective families preserve per-action image entropy") {
    const ToyDataset ds = default_toy_dataset();
    std::map<std::string, double> raw;
    for (const auto& item : ds.items) raw[item.image.str()] += item.weight;
    const double h_raw = map_entropy(raw);

    for (const auto& name : {"rotation4", "hflip", "vflip", "jigsaw4"}) {
        const TransformFamily f = make_family(name);
        for (std::size_t a = 0; a < f.action_space.size(); ++a) {
            std::map<std::string, double> w;
            for (const auto& item : ds.items) w[f.observe(item.image, a)] += item.weight;
            INFO(name << " action " << a);
            CHECK_THAT(map_entropy(w), Catch::Matchers::WithinAbs(h_raw, 1e-10));
        }
    }
}

TEST_CASE("collapsing X kills all structure") {
    const ToyDataset ds = default_toy_dataset();
    const JointTable joint = apply_transform_family(ds, make_family("rotation4"));
    const JointTable flat =
        apply_encoder(joint, constant_encoder(joint.alphabet("X"), numbered_alphabet("Z", 2)));
    const SynergyReport r = synergy_report(flat, "A", "C", "Z");
    CHECK_THAT(r.h_a_given_x, Catch::Matchers::WithinAbs(r.h_a, 1e-12));
    CHECK_THAT(r.synergy, Catch::Matchers::WithinAbs(0.0, 1e-12));
}

TEST_CASE("instance discrimination") {
    const ToyDataset ds = default_toy_dataset();

    SECTION("identity augmentation leaks every instance") {
        const InstanceReport r = instance_discrimination_synergy(ds, make_family("instance"));
        CHECK(r.n_instances == 9);
        std::map<std::string, double> w;
        for (const auto& item : ds.items) w[item.image.str()] += item.weight;
        CHECK_THAT(r.h_i, Catch::Matchers::WithinAbs(map_entropy(w), 1e-12));
        CHECK_THAT(r.h_i_given_x, Catch::Matchers::WithinAbs(0.0, 1e-12));
        CHECK_THAT(r.synergy, Catch::Matchers::WithinAbs(0.0, 1e-12));
    }

    SECTION("grayscale collides same-shape instances of different colors") {
        const InstanceReport r = instance_discrimination_synergy(ds, make_family("grayscale"));
        CHECK(r.h_i_given_x > 1e-9);
        CHECK(r.synergy >= 0.0);
    }

    SECTION("class-resolvable collisions give ln(N / classes)") {
        // two classes x two colors, augmentation projects onto color alone:
        // X hides the class, C then pins the instance exactly
        DatasetSpec spec;
        spec.classes = {{"a", {0x00FF}}, {"b", {0xFF00}}};
        spec.styles = {2, 3};
        const ToyDataset tiny = build_toy_dataset(spec);

        TransformFamily color_only;
        color_only.name = "color_only";
        color_only.action_space = Alphabet{"A", {"0"}};
        color_only.action = [](const ToyImage& img, std::size_t) { return img; };
        color_only.observe = [](const ToyImage& img, std::size_t) {
            for (int v : img.px)
                if (v > 0) return std::to_string(v);
            return std::string("blank");
        };

        const InstanceReport r = instance_discrimination_synergy(tiny, color_only);
        CHECK(r.n_instances == 4);
        CHECK_THAT(r.h_i_given_x, Catch::Matchers::WithinAbs(kLn2, 1e-12));
        CHECK_THAT(r.h_i_given_xc, Catch::Matchers::WithinAbs(0.0, 1e-12));
        CHECK_THAT(r.synergy, Catch::Matchers::WithinAbs(std::log(4.0 / 2.0), 1e-12));
    }
}

TEST_CASE("intrinsic poses flow into the joint") {
    DatasetSpec spec;
    spec.classes = {{"tee_up", {0x066F}}, {"square", {0x0660}}};
    spec.poses = {0, 1};
    const ToyDataset ds = build_toy_dataset(spec);
    CHECK(ds.items.size() == 12);

    const JointTable joint = apply_transform_family(ds, make_family("rotation4"));
    CHECK(joint.alphabet("Abar").symbols == std::vector<std::string>{"0", "90"});
    CHECK_THAT(entropy(joint, {"Abar"}), Catch::Matchers::WithinAbs(kLn2, 1e-12));
    CHECK(mutual_information(joint, {"A"}, {"Abar"}) <= 1e-10);
    CHECK_NOTHROW(synergy_report(joint));
}
