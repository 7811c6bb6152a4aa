#include <gtest/gtest.h>

#include "property_suite.hpp"

namespace
{

void expect_clean(std::uint64_t seed, int per_family)
{
    int total = 0;
    for (const props::Family &f : props::run_suite(seed, per_family)) {
        total += f.cases;
        EXPECT_EQ(f.cases, per_family) << f.name;
        for (const std::string &msg : f.failures) {
            ADD_FAILURE() << f.name << ": " << msg;
        }
    }
    EXPECT_GE(total, 6 * per_family);
}

} // namespace

TEST(Properties, SeedA)
{
    expect_clean(1, 200);
}

TEST(Properties, SeedB)
{
    expect_clean(0x5eedULL, 200);
}

TEST(Properties, ManySmallSeeds)
{
    for (std::uint64_t s = 100; s < 120; ++s) {
        expect_clean(s, 10);
    }
}
