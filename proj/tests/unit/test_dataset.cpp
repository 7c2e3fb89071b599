/*
 * Copyright (C) 2026 The glyphembed Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <set>

#include "glyphembed/error.hpp"
#include "glyphembed/glyphset/dataset.hpp"
#include "test_support.hpp"

namespace glyphembed::glyphset {
namespace {

namespace fs = std::filesystem;
using testing::fonts_dir;
using testing::TempDir;

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no Error thrown";
  return ErrorCode::InvalidArgument;
}

// Fonts "f0".."f{n-1}", every pixel of font f set to f/255.
GlyphDataset synthetic(std::size_t n_fonts, const std::string& charset, int size = 4) {
  const auto cs = CharSet::named(charset);
  std::vector<FontSource> fonts;
  std::vector<float> px;
  for (std::size_t f = 0; f < n_fonts; ++f) {
    fonts.push_back({"f" + std::to_string(f), FontSource::Kind::ImageDir, {}});
    for (std::size_t i = 0; i < cs.size() * size * size; ++i) px.push_back(static_cast<float>(f) / 255.0f);
  }
  return GlyphDataset(cs, size, std::move(fonts), std::move(px));
}

void copy_fonts(const fs::path& dst, std::initializer_list<const char*> names) {
  for (const char* n : names) fs::copy_file(fonts_dir() / n, dst / n);
}

TEST(Dataset, CountsThreeCompleteFonts) {
  TempDir dir;
  copy_fonts(dir.path(), {"DejaVuSans.ttf", "Lato-Regular.ttf", "Roboto-Bold.ttf"});
  const auto ds = load_dataset(dir.path(), CharSet::named("0-9"), 32);
  EXPECT_EQ(ds.num_fonts(), 3u);
  EXPECT_EQ(ds.num_images(), 30u);
  EXPECT_TRUE(ds.exclusions().empty());
  EXPECT_EQ(ds.font_ids(), (std::vector<std::string>{"DejaVuSans", "Lato-Regular", "Roboto-Bold"}));
  EXPECT_EQ(ds.image("Lato-Regular", U'7').codepoint, U'7');
}

TEST(Dataset, ReloadIsIdentical) {
  TempDir dir;
  copy_fonts(dir.path(), {"Roboto-Thin.ttf", "DejaVuSerif.ttf"});
  const auto a = load_dataset(dir.path(), CharSet::named("a-z"), 24);
  const auto b = load_dataset(dir.path(), CharSet::named("a-z"), 24);
  ASSERT_EQ(a.font_ids(), b.font_ids());
  for (std::size_t f = 0; f < a.num_fonts(); ++f) {
    for (std::size_t c = 0; c < a.charset().size(); ++c) EXPECT_EQ(a.image(f, c), b.image(f, c));
  }
}

TEST(Dataset, PrerenderedRoundTrip) {
  TempDir src, out;
  copy_fonts(src.path(), {"Lato-Bold.ttf", "STIXGeneral.ttf"});
  const auto ds = load_dataset(src.path(), CharSet::named("A-F"), 32);
  write_rendered(ds, out.path());
  EXPECT_TRUE(fs::exists(out / "Lato-Bold" / "0041.png"));
  EXPECT_TRUE(fs::exists(out / "manifest.json"));
  const auto back = load_dataset(out.path(), CharSet::named("A-F"), 32);
  ASSERT_EQ(back.font_ids(), ds.font_ids());
  EXPECT_EQ(back.fonts()[0].kind, FontSource::Kind::ImageDir);
  for (std::size_t f = 0; f < ds.num_fonts(); ++f) {
    for (std::size_t c = 0; c < 6; ++c) {
      const auto a = ds.pixels(f, c), b = back.pixels(f, c);
      EXPECT_TRUE(std::equal(a.begin(), a.end(), b.begin()));
    }
  }
}

TEST(Dataset, FontMissingAGlyphIsExcludedAndReported) {
  TempDir src, out;
  copy_fonts(src.path(), {"DejaVuSans.ttf", "Lato-Light.ttf"});
  write_rendered(load_dataset(src.path(), CharSet::named("a-Z"), 16), out.path());
  fs::remove(out / "Lato-Light" / "0051.png");
  const auto ds = load_dataset(out.path(), CharSet::named("a-Z"), 16);
  EXPECT_EQ(ds.font_ids(), std::vector<std::string>{"DejaVuSans"});
  ASSERT_EQ(ds.exclusions().size(), 1u);
  EXPECT_EQ(ds.exclusions()[0].font_id, "Lato-Light");
  EXPECT_EQ(ds.exclusions()[0].codepoint, U'Q');
  EXPECT_EQ(ds.manifest()["exclusions"].size(), 1u);
}

TEST(Dataset, FontFileLackingCharacterIsExcluded) {
  TempDir dir;
  copy_fonts(dir.path(), {"DejaVuSans.ttf"});
  std::ofstream(dir / "Broken.ttf") << "not a font";
  const auto ds = load_dataset(dir.path(), CharSet::named("0-9"), 16);
  EXPECT_EQ(ds.num_fonts(), 1u);
  ASSERT_EQ(ds.exclusions().size(), 1u);
  EXPECT_EQ(ds.exclusions()[0].font_id, "Broken");
  EXPECT_EQ(ds.exclusions()[0].codepoint, 0u);
}

TEST(Dataset, LoadErrors) {
  TempDir empty;
  EXPECT_EQ(code_of([&] { load_dataset(empty.path(), CharSet::named("0-9")); }), ErrorCode::EmptyDataset);
  EXPECT_EQ(code_of([] { load_dataset("/nonexistent/fonts", CharSet::named("0-9")); }), ErrorCode::EmptyDataset);

  TempDir mixed;
  copy_fonts(mixed.path(), {"Roboto-Light.ttf"});
  fs::create_directory(mixed / "Roboto-Light");
  EXPECT_EQ(code_of([&] { load_dataset(mixed.path(), CharSet::named("0-9")); }), ErrorCode::MixedLayout);
}

TEST(Dataset, Manifest) {
  const auto ds = synthetic(2, "0-2");
  const auto m = ds.manifest();
  EXPECT_EQ(m["charset"], "0-2");
  EXPECT_EQ(m["size"], 4);
  EXPECT_EQ(m["font_ids"], nlohmann::json({"f0", "f1"}));
  EXPECT_EQ(m["codepoints"], nlohmann::json({"0030", "0031", "0032"}));
}

TEST(Dataset, SubsetAndRestrict) {
  const auto ds = synthetic(4, "A-E");
  const std::vector<std::size_t> pick{3, 1};
  const auto sub = ds.subset_fonts(pick);
  EXPECT_EQ(sub.font_ids(), (std::vector<std::string>{"f3", "f1"}));
  EXPECT_FLOAT_EQ(sub.pixels(0, 2)[0], 3.0f / 255.0f);
  const auto r = ds.restrict_charset(CharSet::named("B-C"));
  EXPECT_EQ(r.charset().size(), 2u);
  EXPECT_EQ(r.image(2, 1).codepoint, U'C');
  EXPECT_EQ(code_of([&] { ds.restrict_charset(CharSet::named("X-Z")); }), ErrorCode::InvalidCharset);
  EXPECT_EQ(code_of([&] { ds.image("nope", U'A'); }), ErrorCode::UnknownFont);
  EXPECT_EQ(code_of([&] { ds.image("f0", U'Z'); }), ErrorCode::UnknownCharacter);
}

std::vector<std::string> ids(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("font_" + std::to_string(i));
  return out;
}

TEST(Split, PartitionContract) {
  const auto names = ids(100);
  const auto p = partition_fonts(names, {1, 10});
  EXPECT_EQ(p.train.size(), 90u);
  EXPECT_EQ(p.val.size(), 10u);
  std::set<std::size_t> all(p.train.begin(), p.train.end());
  for (auto v : p.val) EXPECT_TRUE(all.insert(v).second);
  EXPECT_EQ(all.size(), 100u);
  EXPECT_TRUE(std::is_sorted(p.train.begin(), p.train.end()));
}

TEST(Split, DeterministicAndOrderIndependent) {
  auto names = ids(40);
  const auto a = partition_fonts(names, {7, 5});
  EXPECT_EQ(partition_fonts(names, {7, 5}).val, a.val);
  std::set<std::string> val_a;
  for (auto i : a.val) val_a.insert(names[i]);
  std::reverse(names.begin(), names.end());
  std::set<std::string> val_b;
  for (auto i : partition_fonts(names, {7, 5}).val) val_b.insert(names[i]);
  EXPECT_EQ(val_a, val_b);
  EXPECT_NE(partition_fonts(names, {8, 5}).val, partition_fonts(names, {7, 5}).val);
}

TEST(Split, CorpusScaleCounts) {
  const auto p = partition_fonts(ids(3802), {0, 100});
  EXPECT_EQ(p.train.size(), 3702u);
  EXPECT_EQ(p.val.size(), 100u);
}

TEST(Split, InvalidSpecs) {
  const auto names = ids(5);
  EXPECT_EQ(code_of([&] { partition_fonts(names, {0, 0}); }), ErrorCode::InvalidSplit);
  EXPECT_EQ(code_of([&] { partition_fonts(names, {0, 5}); }), ErrorCode::InvalidSplit);
}

TEST(Split, DatasetSplitIsDisjoint) {
  const auto ds = synthetic(12, "0-3");
  const auto [train, val] = split_fonts(ds, {3, 4});
  EXPECT_EQ(train.num_fonts(), 8u);
  EXPECT_EQ(val.num_fonts(), 4u);
  const auto train_ids = train.font_ids();
  for (const auto& id : val.font_ids()) EXPECT_EQ(std::count(train_ids.begin(), train_ids.end(), id), 0);
}

TEST(Minibatch, Contract) {
  const auto ds = synthetic(5, "0-9");
  Rng rng(4);
  for (int rep = 0; rep < 50; ++rep) {
    const auto d = sample_minibatch(ds, 5, rng);
    ASSERT_EQ(d.entries.size(), 5u);
    ASSERT_EQ(d.images.size(), 10u);
    std::set<std::string> fonts;
    for (std::size_t n = 0; n < 5; ++n) {
      const auto& e = d.entries[n];
      fonts.insert(e.font_id);
      EXPECT_NE(e.codepoint_1, e.codepoint_2);
      EXPECT_EQ(d.images[2 * n].font_id, e.font_id);
      EXPECT_EQ(d.images[2 * n + 1].font_id, e.font_id);
      EXPECT_EQ(d.images[2 * n].codepoint, e.codepoint_1);
      EXPECT_EQ(d.images[2 * n + 1].codepoint, e.codepoint_2);
      EXPECT_EQ(ds.charset()[e.char_1], e.codepoint_1);
    }
    EXPECT_EQ(fonts.size(), 5u);
  }
}

TEST(Minibatch, ReplayIsIdentical) {
  const auto ds = synthetic(6, "A-Z");
  Rng a(99), b(99);
  for (int i = 0; i < 5; ++i) {
    const auto x = sample_minibatch(ds, 3, a), y = sample_minibatch(ds, 3, b);
    for (std::size_t n = 0; n < 3; ++n) {
      EXPECT_EQ(x.entries[n].font_id, y.entries[n].font_id);
      EXPECT_EQ(x.entries[n].codepoint_1, y.entries[n].codepoint_1);
      EXPECT_EQ(x.entries[n].codepoint_2, y.entries[n].codepoint_2);
    }
  }
}

TEST(Minibatch, UniformFontFrequency) {
  const auto ds = synthetic(4, "0-9");
  Rng rng(2024);
  std::vector<int> hits(4, 0);
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) {
    for (const auto& e : sample_minibatch(ds, 2, rng).entries) ++hits[e.font];
  }
  for (int h : hits) EXPECT_NEAR(static_cast<double>(h) / draws, 0.5, 0.02);
}

TEST(Minibatch, UniformCharacterPairs) {
  const auto ds = synthetic(2, "0-3");
  Rng rng(5);
  std::vector<int> pairs(16, 0);
  const int draws = 12000;
  for (int i = 0; i < draws; ++i) {
    const auto e = sample_minibatch(ds, 1, rng).entries[0];
    ++pairs[e.char_1 * 4 + e.char_2];
  }
  for (std::size_t a = 0; a < 4; ++a) {
    for (std::size_t b = 0; b < 4; ++b) {
      if (a == b) {
        EXPECT_EQ(pairs[a * 4 + b], 0);
      } else {
        EXPECT_NEAR(pairs[a * 4 + b] / static_cast<double>(draws), 1.0 / 12.0, 0.01);
      }
    }
  }
}

TEST(Minibatch, TooSmall) {
  Rng rng(1);
  EXPECT_EQ(code_of([&] { sample_minibatch(synthetic(3, "0-9"), 4, rng); }), ErrorCode::DatasetTooSmall);
  EXPECT_EQ(code_of([&] { sample_minibatch(synthetic(3, "A"), 2, rng); }), ErrorCode::DatasetTooSmall);
}

TEST(Crop, IdentityParameters) {
  Rng rng(3);
  const auto img = testing::random_images(1, 32, rng)[0];
  const auto out = random_resized_crop(img, rng, {1.0, 1.0, 1.0, 1.0});
  ASSERT_EQ(out.pixels.size(), img.pixels.size());
  for (std::size_t i = 0; i < img.pixels.size(); ++i) EXPECT_NEAR(out.pixels[i], img.pixels[i], 1e-6);
}

TEST(Crop, ConstantImageStaysConstant) {
  Rng rng(8);
  glyphset::GlyphImage img{"c", U'A', 24, std::vector<float>(24 * 24, 0.5f)};
  for (int i = 0; i < 20; ++i) {
    for (float v : random_resized_crop(img, rng).pixels) EXPECT_FLOAT_EQ(v, 0.5f);
  }
}

TEST(Crop, ShapeAndRange) {
  Rng rng(12);
  const auto imgs = testing::random_images(10, 16, rng);
  for (const auto& img : imgs) {
    const auto out = random_resized_crop(img, rng, {0.5, 1.0, 0.7, 1.4});
    EXPECT_EQ(out.size, img.size);
    EXPECT_EQ(out.font_id, img.font_id);
    ASSERT_EQ(out.pixels.size(), img.pixels.size());
    for (float v : out.pixels) {
      EXPECT_GE(v, 0.0f);
      EXPECT_LE(v, 1.0f);
    }
  }
}

TEST(Crop, ZoomsIn) {
  // A crop smaller than the canvas moves the vertical edge.
  glyphset::GlyphImage img{"e", U'A', 32, std::vector<float>(32 * 32, 1.0f)};
  for (int r = 0; r < 32; ++r) {
    for (int c = 0; c < 16; ++c) img.pixels[r * 32 + c] = 0.0f;
  }
  Rng rng(1);
  bool changed = false;
  for (int i = 0; i < 10; ++i) changed |= random_resized_crop(img, rng, {0.6, 0.6, 1.0, 1.0}).pixels != img.pixels;
  EXPECT_TRUE(changed);
}

}  // namespace
}  // namespace glyphembed::glyphset
