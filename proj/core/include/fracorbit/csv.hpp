#ifndef FRACORBIT_CSV_HPP
#define FRACORBIT_CSV_HPP

#include <filesystem>
#include <string>
#include <vector>

namespace fracorbit {

// Column-oriented numeric CSV: decimal notation with 17 significant
// digits, '.' separator, LF line endings; bit-exact across platforms.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> columns;

    int n_rows() const { return columns.empty() ? 0 : static_cast<int>(columns[0].size()); }
};

std::string format_double_17(double v);

void write_csv(const std::filesystem::path& path, const CsvTable& table);
CsvTable read_csv(const std::filesystem::path& path);

}  // namespace fracorbit

#endif
