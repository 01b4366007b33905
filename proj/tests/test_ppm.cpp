#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "support.hpp"
#include "torchpilot/ppm.hpp"

using namespace torchpilot;
using imgproc::Color;
using imgproc::Rgb;
using imgproc::RgbImage;

namespace {

RgbImage random_rgb(std::mt19937_64& rng, int w, int h)
{
    std::uniform_int_distribution<int> byte(0, 255);
    RgbImage img(w, h);
    for (auto& p : img.pixels()) p = {std::uint8_t(byte(rng)), std::uint8_t(byte(rng)), std::uint8_t(byte(rng))};
    return img;
}

} // namespace

TEST(Ppm, RoundTripIsBitExact)
{
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 10; ++trial) {
        const auto img = random_rgb(rng, 1 + trial * 7, 3 + trial);
        std::stringstream buf;
        ppm::write(buf, img);
        EXPECT_EQ(ppm::read(buf), img);
    }
}

TEST(Ppm, HeaderLayout)
{
    std::stringstream buf;
    ppm::write(buf, RgbImage(3, 2, Rgb{1, 2, 3}));
    const auto s = buf.str();
    EXPECT_EQ(s.substr(0, 11), "P6\n3 2\n255\n");
    EXPECT_EQ(s.size(), 11u + 18u);
}

TEST(Ppm, CommentsInHeaderAreSkipped)
{
    std::string data = "P6\n# made by hand\n2 1\n# another\n255\n";
    data += std::string("\x01\x02\x03\x04\x05\x06", 6);
    std::istringstream in(data);
    const auto img = ppm::read(in);
    EXPECT_EQ(img.width(), 2);
    EXPECT_EQ(img.at(1, 0), (Rgb{4, 5, 6}));
}

TEST(Ppm, MalformedInputIsRejected)
{
    std::istringstream wrong_magic("P3\n1 1\n255\n000");
    EXPECT_THROW(ppm::read(wrong_magic), InvalidInput);
    std::istringstream wrong_max("P6\n1 1\n65535\n000000");
    EXPECT_THROW(ppm::read(wrong_max), InvalidInput);
    std::istringstream truncated("P6\n2 2\n255\nabc");
    EXPECT_THROW(ppm::read(truncated), InvalidInput);
    std::istringstream zero("P6\n0 2\n255\n");
    EXPECT_THROW(ppm::read(zero), InvalidInput);
}

TEST(Ppm, QuantizedRoundTripUsesPrimaries)
{
    std::mt19937_64 rng(4);
    const auto q = testsupport::random_frame(rng, 19, 23);
    std::stringstream buf;
    ppm::write_quantized(buf, q);
    const auto rgb = ppm::read(buf);
    for (std::size_t i = 0; i < q.size(); ++i) {
        EXPECT_EQ(rgb.pixels()[i], imgproc::primary(q.pixels()[i]));
    }
    buf.clear();
    buf.seekg(0);
    EXPECT_EQ(ppm::read_quantized(buf), q);
}

TEST(Ppm, QuantizedReadRejectsNonPrimary)
{
    std::stringstream buf;
    ppm::write(buf, RgbImage(2, 2, Rgb{10, 0, 0}));
    EXPECT_THROW(ppm::read_quantized(buf), InvalidInput);
}

TEST(Ppm, FileRoundTripAndMissingFile)
{
    testsupport::TempDir dir;
    std::mt19937_64 rng(8);
    const auto img = random_rgb(rng, 16, 9);
    ppm::write_file(dir.path() / "a.ppm", img);
    EXPECT_EQ(ppm::read_file(dir.path() / "a.ppm"), img);
    EXPECT_THROW(ppm::read_file(dir.path() / "missing.ppm"), IoError);
    EXPECT_THROW(ppm::write_file(dir.path() / "no" / "such" / "dir.ppm", img), IoError);
}
