#pragma once

#include <array>
#include <cstddef>
#include <istream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace arlif {

inline constexpr std::size_t kNumColumns = 41;

/// Columns 1..3 (protocol_type, service, flag) are categorical in both layouts.
inline constexpr std::array<std::size_t, 3> kCategoricalColumns = {1, 2, 3};

extern const std::array<std::string_view, kNumColumns> kColumnNames;

constexpr bool is_categorical(std::size_t column) noexcept {
    return column >= 1 && column <= 3;
}

enum class DatasetFormat { NslKdd, Kdd99 };

DatasetFormat parse_format(std::string_view name);
std::string_view to_string(DatasetFormat format) noexcept;

using FieldValue = std::variant<std::string, double>;

struct Record {
    std::array<FieldValue, kNumColumns> features;
    int label = 0;  // 0 = normal, 1 = attack
    std::string raw_label;

    bool operator==(const Record&) const = default;
};

Record parse_record(std::string_view line, DatasetFormat format);

/// Like parse_record but also accepts bare 41-feature rows (label "normal").
Record parse_unlabeled_record(std::string_view line, DatasetFormat format);

/// Comma-separated features followed by the label (no difficulty column).
std::string to_line(const Record& r);

/// Reads up to `limit` non-empty rows (0 = no limit) from the head of the stream.
std::vector<Record> read_records(std::istream& in, DatasetFormat format, std::size_t limit = 0);
std::vector<Record> read_records_file(const std::string& path, DatasetFormat format,
                                      std::size_t limit = 0);

using FeatureVector = std::vector<double>;

struct ColumnRange {
    double min = 0.0;
    double max = 0.0;
    bool operator==(const ColumnRange&) const = default;
};

struct Preprocessor {
    /// Sorted category tokens per categorical column, indexed like kCategoricalColumns.
    std::array<std::vector<std::string>, kCategoricalColumns.size()> vocab;
    std::array<ColumnRange, kNumColumns> min_max{};
    std::vector<std::size_t> selected;

    std::size_t m() const noexcept { return selected.size(); }

    /// Encoded (pre-scaling) value of one column of a record.
    double encode(const Record& r, std::size_t column) const;

    bool operator==(const Preprocessor&) const = default;
};

/// Absolute point-biserial correlation of every column with the label,
/// sorted by descending score, ties by ascending column index.
std::vector<std::pair<std::size_t, double>> rank_features(std::span<const Record> records);

Preprocessor fit_preprocessor(std::span<const Record> records, std::size_t m);

FeatureVector transform(const Preprocessor& pre, const Record& r);

}  // namespace arlif
