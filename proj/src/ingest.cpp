#include "arlif/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>

#include "arlif/error.hpp"

namespace arlif {

const std::array<std::string_view, kNumColumns> kColumnNames = {
    "duration",
    "protocol_type",
    "service",
    "flag",
    "src_bytes",
    "dst_bytes",
    "land",
    "wrong_fragment",
    "urgent",
    "hot",
    "num_failed_logins",
    "logged_in",
    "num_compromised",
    "root_shell",
    "su_attempted",
    "num_root",
    "num_file_creations",
    "num_shells",
    "num_access_files",
    "num_outbound_cmds",
    "is_host_login",
    "is_guest_login",
    "count",
    "srv_count",
    "serror_rate",
    "srv_serror_rate",
    "rerror_rate",
    "srv_rerror_rate",
    "same_srv_rate",
    "diff_srv_rate",
    "srv_diff_host_rate",
    "dst_host_count",
    "dst_host_srv_count",
    "dst_host_same_srv_rate",
    "dst_host_diff_srv_rate",
    "dst_host_same_src_port_rate",
    "dst_host_srv_diff_host_rate",
    "dst_host_serror_rate",
    "dst_host_srv_serror_rate",
    "dst_host_rerror_rate",
    "dst_host_srv_rerror_rate",
};

DatasetFormat parse_format(std::string_view name) {
    if (name == "nsl-kdd") return DatasetFormat::NslKdd;
    if (name == "kdd99") return DatasetFormat::Kdd99;
    throw Error(ErrorKind::InvalidArgument, "unknown dataset format '" + std::string(name) + "'");
}

std::string_view to_string(DatasetFormat format) noexcept {
    return format == DatasetFormat::NslKdd ? "nsl-kdd" : "kdd99";
}

namespace {

std::string_view trim(std::string_view s) {
    const auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
    while (!s.empty() && ws(s.front())) s.remove_prefix(1);
    while (!s.empty() && ws(s.back())) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    out.reserve(44);
    std::size_t start = 0;
    for (;;) {
        const auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(trim(line.substr(start)));
            return out;
        }
        out.push_back(trim(line.substr(start, comma - start)));
        start = comma + 1;
    }
}

double parse_number(std::string_view token, std::size_t column) {
    double value = 0.0;
    const auto* first = token.data();
    const auto* last = token.data() + token.size();
    if (!token.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (token.empty() || ec != std::errc() || ptr != last || !std::isfinite(value)) {
        throw Error(ErrorKind::NumericParse, "column " + std::to_string(column) + " ('" +
                                                 std::string(kColumnNames[column]) + "'): '" +
                                                 std::string(token) + "'");
    }
    return value;
}

std::array<std::vector<std::string>, kCategoricalColumns.size()> build_vocab(
    std::span<const Record> records) {
    std::array<std::vector<std::string>, kCategoricalColumns.size()> vocab;
    for (std::size_t c = 0; c < kCategoricalColumns.size(); ++c) {
        auto& tokens = vocab[c];
        for (const auto& r : records) {
            tokens.push_back(std::get<std::string>(r.features[kCategoricalColumns[c]]));
        }
        std::sort(tokens.begin(), tokens.end());
        tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
    }
    return vocab;
}

double encode_with(const std::array<std::vector<std::string>, kCategoricalColumns.size()>& vocab,
                   const Record& r, std::size_t column) {
    if (!is_categorical(column)) return std::get<double>(r.features[column]);
    const auto& tokens = vocab[column - kCategoricalColumns.front()];
    const auto& token = std::get<std::string>(r.features[column]);
    const auto it = std::lower_bound(tokens.begin(), tokens.end(), token);
    if (it == tokens.end() || *it != token) return static_cast<double>(tokens.size());
    return static_cast<double>(it - tokens.begin());
}

}  // namespace

Record parse_record(std::string_view line, DatasetFormat format) {
    const auto fields = split_fields(trim(line));
    const std::size_t expected = format == DatasetFormat::NslKdd ? kNumColumns + 2 : kNumColumns + 1;
    if (fields.size() != expected) {
        throw Error(ErrorKind::FieldCountMismatch,
                    "expected " + std::to_string(expected) + " fields for " +
                        std::string(to_string(format)) + ", got " + std::to_string(fields.size()));
    }

    Record r;
    for (std::size_t c = 0; c < kNumColumns; ++c) {
        if (is_categorical(c)) {
            r.features[c] = std::string(fields[c]);
        } else {
            r.features[c] = parse_number(fields[c], c);
        }
    }
    std::string_view label = fields[kNumColumns];
    if (format == DatasetFormat::Kdd99 && !label.empty() && label.back() == '.') {
        label.remove_suffix(1);
    }
    r.raw_label = std::string(label);
    r.label = r.raw_label == "normal" ? 0 : 1;
    return r;
}

Record parse_unlabeled_record(std::string_view line, DatasetFormat format) {
    const auto commas = static_cast<std::size_t>(std::count(line.begin(), line.end(), ','));
    if (commas + 1 != kNumColumns) return parse_record(line, format);
    std::string full(trim(line));
    full += format == DatasetFormat::NslKdd ? ",normal,0" : ",normal.";
    return parse_record(full, format);
}

std::string to_line(const Record& r) {
    std::string out;
    char buf[64];
    for (std::size_t c = 0; c < kNumColumns; ++c) {
        if (const auto* token = std::get_if<std::string>(&r.features[c])) {
            out += *token;
        } else {
            const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, std::get<double>(r.features[c]));
            out.append(buf, ptr);
        }
        out += ',';
    }
    out += r.raw_label;
    return out;
}

std::vector<Record> read_records(std::istream& in, DatasetFormat format, std::size_t limit) {
    std::vector<Record> records;
    std::string line;
    std::size_t line_no = 0;
    while ((limit == 0 || records.size() < limit) && std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        try {
            records.push_back(parse_record(line, format));
        } catch (const Error& e) {
            throw Error(e.kind(), "line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return records;
}

std::vector<Record> read_records_file(const std::string& path, DatasetFormat format,
                                      std::size_t limit) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "'");
    return read_records(in, format, limit);
}

double Preprocessor::encode(const Record& r, std::size_t column) const {
    return encode_with(vocab, r, column);
}

std::vector<std::pair<std::size_t, double>> rank_features(std::span<const Record> records) {
    if (records.empty()) throw Error(ErrorKind::Empty, "rank_features needs records");
    const auto positives = std::count_if(records.begin(), records.end(),
                                         [](const Record& r) { return r.label == 1; });
    if (positives == 0 || positives == static_cast<std::ptrdiff_t>(records.size())) {
        throw Error(ErrorKind::SingleClass, "both normal and attack records are required");
    }

    const auto vocab = build_vocab(records);
    const double n = static_cast<double>(records.size());
    const double p = static_cast<double>(positives) / n;

    std::vector<std::pair<std::size_t, double>> scores;
    scores.reserve(kNumColumns);
    std::vector<std::pair<double, int>> column(records.size());
    for (std::size_t c = 0; c < kNumColumns; ++c) {
        for (std::size_t i = 0; i < records.size(); ++i) {
            column[i] = {encode_with(vocab, records[i], c), records[i].label};
        }
        // Summing in sorted order makes the score independent of record order.
        std::sort(column.begin(), column.end());

        double sum = 0.0;
        for (const auto& [v, y] : column) sum += v;
        const double mean = sum / n;
        double var = 0.0;
        double cov = 0.0;
        for (const auto& [v, y] : column) {
            const double d = v - mean;
            var += d * d;
            cov += d * (static_cast<double>(y) - p);
        }
        double score = 0.0;
        if (var > 0.0) {
            const double label_var = n * p * (1.0 - p);
            score = std::min(1.0, std::abs(cov) / std::sqrt(var * label_var));
        }
        scores.emplace_back(c, score);
    }
    std::stable_sort(scores.begin(), scores.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    return scores;
}

Preprocessor fit_preprocessor(std::span<const Record> records, std::size_t m) {
    if (m < 1 || m > kNumColumns) {
        throw Error(ErrorKind::InvalidArgument, "feature count must lie in [1, 41], got " +
                                                    std::to_string(m));
    }
    const auto ranking = rank_features(records);

    Preprocessor pre;
    pre.vocab = build_vocab(records);
    for (std::size_t i = 0; i < m; ++i) pre.selected.push_back(ranking[i].first);

    for (std::size_t c = 0; c < kNumColumns; ++c) {
        auto& range = pre.min_max[c];
        range.min = range.max = pre.encode(records.front(), c);
        for (const auto& r : records) {
            const double v = pre.encode(r, c);
            range.min = std::min(range.min, v);
            range.max = std::max(range.max, v);
        }
    }
    return pre;
}

FeatureVector transform(const Preprocessor& pre, const Record& r) {
    FeatureVector x(pre.m());
    for (std::size_t j = 0; j < pre.m(); ++j) {
        const std::size_t c = pre.selected[j];
        const auto [lo, hi] = pre.min_max[c];
        if (!(hi > lo)) {
            x[j] = 0.0;
            continue;
        }
        x[j] = std::clamp((pre.encode(r, c) - lo) / (hi - lo), 0.0, 1.0);
    }
    return x;
}

}  // namespace arlif
