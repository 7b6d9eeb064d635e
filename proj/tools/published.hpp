#pragma once

// Reference values printed next to measured ones in `mtconv report`.

#include <array>
#include <string_view>

namespace mtconv::published {

struct kv_row {
    unsigned v;
    unsigned k64;
    unsigned k32;
};

inline constexpr std::array<kv_row, 32> table1{{
    {1, 19937, 19937}, {2, 9968, 9968}, {3, 6643, 6240}, {4, 4983, 4984}, {5, 3894, 3738}, {6, 2917, 3115},
    {7, 2294, 2493},   {8, 2180, 2492}, {9, 2068, 1869}, {10, 1869, 1869}, {11, 1558, 1248}, {12, 623, 1246},
    {13, 623, 1246},   {14, 623, 1246}, {15, 623, 1246}, {16, 623, 1246}, {17, 623, 623},  {18, 623, 623},
    {19, 623, 623},    {20, 623, 623},  {21, 623, 623},  {22, 623, 623},  {23, 623, 623},  {24, 623, 623},
    {25, 623, 623},    {26, 623, 623},  {27, 623, 623},  {28, 623, 623},  {29, 623, 623},  {30, 510, 623},
    {31, 510, 623},    {32, 510, 623},
}};

/// One row of a p-value table: five seeds, as printed.
struct p_row {
    std::string_view label;
    std::string_view preset;
    std::array<std::string_view, 5> p;
};

inline constexpr std::array<p_row, 2> table2{{
    {"32-bit (a)", "bigcrush14", {"3.3e-52", "1.1e-73", "1.8e-57", "7.3e-63", "8.8e-44"}},
    {"64-bit (b)", "bigcrush14", {"3.8e-19", "6.0e-21", "2.8e-17", "6.8e-15", "4.3e-19"}},
}};

inline constexpr std::array<p_row, 4> table3{{
    {"32-bit (a)", "bigcrush5", {"0.28", "0.58", "0.78", "0.27", "0.25"}},
    {"64-bit (b)", "bigcrush5", {"1.8e-25", "5.7e-34", "1.7e-23", "2.8e-37", "8.8e-39"}},
    {"32-bit (a)", "bigcrush6", {"0.32", "0.21", "0.51", "0.32", "0.32"}},
    {"64-bit (b)", "bigcrush6", {"1.4e-4", "7.6e-7", "2.8e-17", "4.8e-8", "1.1e-5"}},
}};

inline constexpr std::array<p_row, 2> table4{{
    {"32-bit (a)", "smallcrush8", {"0.79", "0.58", "0.79", "0.37", "0.61"}},
    {"64-bit (b)", "smallcrush8", {"< 1e-300", "< 1e-300", "< 1e-300", "< 1e-300", "< 1e-300"}},
}};

inline constexpr std::array<p_row, 2> table5{{
    {"32-bit (a)", "crush86", {"0.11", "0.22", "0.61", "0.43", "0.85"}},
    {"64-bit (b)", "crush86", {"< 1e-300", "< 1e-300", "< 1e-300", "< 1e-300", "< 1e-300"}},
}};

}  // namespace mtconv::published
