#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "shortseg/segment.hpp"

namespace shortseg {

/// Tabular parse failure; carries the 1-based line number it happened on.
struct ParseError : std::runtime_error {
    std::int64_t line;
    ParseError(std::int64_t line_, const std::string& message)
        : std::runtime_error("line " + std::to_string(line_) + ": " + message), line(line_) {}
};

/// One or more named sequences, as read from a sequence file.
struct SequenceSet {
    std::vector<std::string> ids;
    std::vector<std::vector<double>> values;
};

enum class SequenceFormat {
    auto_detect,
    plain,     // one value per line, single unnamed sequence
    long_tsv,  // id <tab> value, sequences in contiguous blocks
    wide_tsv   // one column per sequence, optional id header row
};

// ---------------------------------------------------------------------------
// low-level helpers

inline std::string slurp_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
    std::string content;
    in.seekg(0, std::ios::end);
    auto size = in.tellg();
    if (size > 0) {
        content.resize(static_cast<std::size_t>(size));
        in.seekg(0);
        in.read(content.data(), size);
    }
    if (in.bad()) throw std::runtime_error("error while reading '" + path + "'");
    return content;
}

/// Writes a whole buffer; "-" means stdout.
inline void write_text(const std::string& path, std::string_view text) {
    if (path == "-") {
        if (std::fwrite(text.data(), 1, text.size(), stdout) != text.size())
            throw std::runtime_error("error while writing to stdout");
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw std::runtime_error("error while writing '" + path + "'");
}

/// Shortest round-trip decimal form of a double.
inline void append_double(std::string& out, double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, res.ptr);
}

/// Fixed-point form with the given number of decimals (digits < 0 falls back
/// to the shortest round-trip form).
inline void append_double(std::string& out, double v, int digits) {
    if (digits < 0) {
        append_double(out, v);
        return;
    }
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, digits);
    out.append(buf, res.ptr);
}

inline void append_integer(std::string& out, std::int64_t v) {
    char buf[24];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, res.ptr);
}

namespace detail {

// Splits a buffer into lines, stripping '\r' and tracking 1-based numbers.
struct LineScanner {
    const char* cursor;
    const char* end;
    std::int64_t line = 0;

    explicit LineScanner(std::string_view text) : cursor(text.data()), end(text.data() + text.size()) {}

    bool next(std::string_view& out) {
        if (cursor == end) return false;
        const char* nl = static_cast<const char*>(
            std::memchr(cursor, '\n', static_cast<std::size_t>(end - cursor)));
        const char* stop = nl ? nl : end;
        std::size_t len = static_cast<std::size_t>(stop - cursor);
        if (len > 0 && stop[-1] == '\r') --len;
        out = std::string_view(cursor, len);
        cursor = nl ? nl + 1 : end;
        ++line;
        return true;
    }
};

inline bool parses_as_double(std::string_view token) {
    double v;
    auto res = std::from_chars(token.data(), token.data() + token.size(), v);
    return res.ec == std::errc{} && res.ptr == token.data() + token.size();
}

inline double parse_value(std::string_view token, std::int64_t line) {
    double v;
    auto res = std::from_chars(token.data(), token.data() + token.size(), v);
    if (res.ec != std::errc{} || res.ptr != token.data() + token.size())
        throw ParseError(line, "cannot parse '" + std::string(token) + "' as a number");
    if (!std::isfinite(v))
        throw ParseError(line, "non-finite value '" + std::string(token) + "'");
    return v;
}

inline std::int64_t parse_integer(std::string_view token, std::int64_t line) {
    std::int64_t v;
    auto res = std::from_chars(token.data(), token.data() + token.size(), v);
    if (res.ec != std::errc{} || res.ptr != token.data() + token.size())
        throw ParseError(line, "cannot parse '" + std::string(token) + "' as an integer");
    return v;
}

inline std::vector<std::string_view> split_tabs(std::string_view text) {
    std::vector<std::string_view> fields;
    std::size_t from = 0;
    while (true) {
        std::size_t tab = text.find('\t', from);
        if (tab == std::string_view::npos) {
            fields.push_back(text.substr(from));
            return fields;
        }
        fields.push_back(text.substr(from, tab - from));
        from = tab + 1;
    }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// sequence files

/// Guesses the format from the first non-empty line: no tab means plain; two
/// fields with a non-numeric id and a numeric value mean long; anything else
/// with tabs means wide.  Files with numeric sequence ids need an explicit
/// format.
inline SequenceFormat detect_sequence_format(std::string_view content) {
    detail::LineScanner scanner(content);
    std::string_view first;
    while (scanner.next(first))
        if (!first.empty()) break;
    if (first.empty()) throw ParseError(1, "empty input");
    if (first.find('\t') == std::string_view::npos) return SequenceFormat::plain;
    auto fields = detail::split_tabs(first);
    if (fields.size() == 2 && !detail::parses_as_double(fields[0]) &&
        detail::parses_as_double(fields[1]))
        return SequenceFormat::long_tsv;
    return SequenceFormat::wide_tsv;
}

inline SequenceSet parse_sequences(std::string_view content,
                                   SequenceFormat format = SequenceFormat::auto_detect) {
    if (format == SequenceFormat::auto_detect) format = detect_sequence_format(content);
    SequenceSet set;
    detail::LineScanner scanner(content);
    std::string_view row;

    if (format == SequenceFormat::plain) {
        set.ids.emplace_back("seq1");
        set.values.emplace_back();
        while (scanner.next(row)) {
            if (row.empty()) continue;
            set.values[0].push_back(detail::parse_value(row, scanner.line));
        }
        if (set.values[0].empty()) throw ParseError(1, "empty input");
        return set;
    }

    if (format == SequenceFormat::long_tsv) {
        std::string_view current;
        std::vector<double>* bucket = nullptr;
        while (scanner.next(row)) {
            if (row.empty()) continue;
            std::size_t tab = row.find('\t');
            if (tab == std::string_view::npos)
                throw ParseError(scanner.line, "expected 'id<tab>value'");
            std::string_view id = row.substr(0, tab);
            std::string_view value = row.substr(tab + 1);
            if (id.empty()) throw ParseError(scanner.line, "empty sequence id");
            if (bucket == nullptr || id != current) {
                for (const std::string& seen : set.ids)
                    if (seen == id)
                        throw ParseError(scanner.line, "sequence '" + std::string(id) +
                                                           "' appears in more than one block");
                set.ids.emplace_back(id);
                set.values.emplace_back();
                bucket = &set.values.back();
                current = id;
            }
            bucket->push_back(detail::parse_value(value, scanner.line));
        }
        if (set.ids.empty()) throw ParseError(1, "empty input");
        return set;
    }

    // wide: optional header of ids, then one column per sequence
    bool saw_header = false;
    while (scanner.next(row)) {
        if (row.empty()) continue;
        auto fields = detail::split_tabs(row);
        if (set.ids.empty()) {
            bool numeric = true;
            for (std::string_view f : fields)
                if (!detail::parses_as_double(f)) numeric = false;
            if (!numeric) {
                for (std::string_view f : fields) {
                    if (f.empty()) throw ParseError(scanner.line, "empty sequence id in header");
                    set.ids.emplace_back(f);
                }
                set.values.resize(set.ids.size());
                saw_header = true;
                continue;
            }
            for (std::size_t k = 0; k < fields.size(); ++k)
                set.ids.push_back("seq" + std::to_string(k + 1));
            set.values.resize(set.ids.size());
        }
        if (fields.size() != set.ids.size())
            throw ParseError(scanner.line, "expected " + std::to_string(set.ids.size()) +
                                               " columns, found " + std::to_string(fields.size()));
        for (std::size_t k = 0; k < fields.size(); ++k)
            set.values[k].push_back(detail::parse_value(fields[k], scanner.line));
    }
    if (set.ids.empty() || set.values[0].empty())
        throw ParseError(saw_header ? 2 : 1, "empty input");
    return set;
}

inline SequenceSet read_sequences(const std::string& path,
                                  SequenceFormat format = SequenceFormat::auto_detect) {
    return parse_sequences(slurp_file(path), format);
}

/// digits >= 0 writes fixed-point values; -1 writes shortest round-trip.
inline std::string serialize_sequences(const SequenceSet& set, SequenceFormat format,
                                       int digits = -1) {
    if (set.ids.size() != set.values.size() || set.ids.empty())
        throw std::invalid_argument("sequence set must hold at least one named sequence");
    std::string out;
    if (format == SequenceFormat::plain) {
        if (set.ids.size() != 1)
            throw std::invalid_argument("plain format holds exactly one sequence");
        out.reserve(set.values[0].size() * 12);
        for (double v : set.values[0]) {
            append_double(out, v, digits);
            out.push_back('\n');
        }
        return out;
    }
    if (format == SequenceFormat::long_tsv) {
        std::size_t total = 0;
        for (const auto& seq : set.values) total += seq.size();
        out.reserve(total * 16);
        for (std::size_t k = 0; k < set.ids.size(); ++k)
            for (double v : set.values[k]) {
                out.append(set.ids[k]);
                out.push_back('\t');
                append_double(out, v, digits);
                out.push_back('\n');
            }
        return out;
    }
    if (format == SequenceFormat::wide_tsv) {
        std::size_t rows = set.values[0].size();
        for (const auto& seq : set.values)
            if (seq.size() != rows)
                throw std::invalid_argument("wide format needs equal-length sequences");
        out.reserve((set.ids.size() * rows + set.ids.size()) * 12);
        for (std::size_t k = 0; k < set.ids.size(); ++k) {
            if (k > 0) out.push_back('\t');
            out.append(set.ids[k]);
        }
        out.push_back('\n');
        for (std::size_t j = 0; j < rows; ++j) {
            for (std::size_t k = 0; k < set.ids.size(); ++k) {
                if (k > 0) out.push_back('\t');
                append_double(out, set.values[k][j], digits);
            }
            out.push_back('\n');
        }
        return out;
    }
    throw std::invalid_argument("cannot serialize with auto-detected format");
}

inline void write_sequences(const std::string& path, const SequenceSet& set, SequenceFormat format,
                            int digits = -1) {
    write_text(path, serialize_sequences(set, format, digits));
}

// ---------------------------------------------------------------------------
// segment tables

/// One detected segment as an output row (1-based inclusive coordinates).
struct SegmentRecord {
    std::string sequence_id;
    Position start = 1;
    Position end = 1;
    Count length = 1;
    Count exceed_count = 0;
    double mean = 0.0;
    std::optional<double> p_value;
};

inline constexpr std::string_view kSegmentHeader =
    "sequence_id\tstart\tend\tlength\texceed_count\tmean\tp_value";

inline std::string serialize_segment_records(const std::vector<SegmentRecord>& rows) {
    std::string out(kSegmentHeader);
    out.push_back('\n');
    for (const SegmentRecord& r : rows) {
        out.append(r.sequence_id);
        out.push_back('\t');
        append_integer(out, r.start);
        out.push_back('\t');
        append_integer(out, r.end);
        out.push_back('\t');
        append_integer(out, r.length);
        out.push_back('\t');
        append_integer(out, r.exceed_count);
        out.push_back('\t');
        append_double(out, r.mean);
        out.push_back('\t');
        if (r.p_value) append_double(out, *r.p_value);
        out.push_back('\n');
    }
    return out;
}

/// Three-column BED: 0-based half-open coordinates, no header.
inline std::string serialize_segment_records_bed(const std::vector<SegmentRecord>& rows) {
    std::string out;
    for (const SegmentRecord& r : rows) {
        out.append(r.sequence_id);
        out.push_back('\t');
        append_integer(out, r.start - 1);
        out.push_back('\t');
        append_integer(out, r.end);
        out.push_back('\n');
    }
    return out;
}

inline std::vector<SegmentRecord> parse_segment_records(std::string_view content) {
    detail::LineScanner scanner(content);
    std::string_view row;
    if (!scanner.next(row)) throw ParseError(1, "empty input");
    auto header = detail::split_tabs(row);
    auto column = [&](std::string_view name) -> std::ptrdiff_t {
        for (std::size_t k = 0; k < header.size(); ++k)
            if (header[k] == name) return static_cast<std::ptrdiff_t>(k);
        return -1;
    };
    std::ptrdiff_t c_id = column("sequence_id"), c_start = column("start"), c_end = column("end");
    std::ptrdiff_t c_len = column("length"), c_cnt = column("exceed_count");
    std::ptrdiff_t c_mean = column("mean"), c_p = column("p_value");
    if (c_id < 0 || c_start < 0 || c_end < 0)
        throw ParseError(1, "header must name sequence_id, start and end columns");

    std::vector<SegmentRecord> rows;
    while (scanner.next(row)) {
        if (row.empty()) continue;
        auto fields = detail::split_tabs(row);
        if (fields.size() != header.size())
            throw ParseError(scanner.line, "expected " + std::to_string(header.size()) +
                                               " columns, found " + std::to_string(fields.size()));
        SegmentRecord r;
        r.sequence_id = std::string(fields[static_cast<std::size_t>(c_id)]);
        r.start = detail::parse_integer(fields[static_cast<std::size_t>(c_start)], scanner.line);
        r.end = detail::parse_integer(fields[static_cast<std::size_t>(c_end)], scanner.line);
        r.length = c_len >= 0
                       ? detail::parse_integer(fields[static_cast<std::size_t>(c_len)], scanner.line)
                       : r.end - r.start + 1;
        if (c_cnt >= 0)
            r.exceed_count =
                detail::parse_integer(fields[static_cast<std::size_t>(c_cnt)], scanner.line);
        if (c_mean >= 0)
            r.mean = detail::parse_value(fields[static_cast<std::size_t>(c_mean)], scanner.line);
        if (c_p >= 0 && !fields[static_cast<std::size_t>(c_p)].empty())
            r.p_value = detail::parse_value(fields[static_cast<std::size_t>(c_p)], scanner.line);
        rows.push_back(std::move(r));
    }
    return rows;
}

inline std::vector<SegmentRecord> read_segment_records(const std::string& path) {
    return parse_segment_records(slurp_file(path));
}

// ---------------------------------------------------------------------------
// ground-truth tables

struct TruthRecord {
    std::string sequence_id;
    Position start = 1;
    Position end = 1;
    double height = 0.0;
};

inline constexpr std::string_view kTruthHeader = "sequence_id\tstart\tend\theight";

inline std::string serialize_truth_records(const std::vector<TruthRecord>& rows) {
    std::string out(kTruthHeader);
    out.push_back('\n');
    for (const TruthRecord& r : rows) {
        out.append(r.sequence_id);
        out.push_back('\t');
        append_integer(out, r.start);
        out.push_back('\t');
        append_integer(out, r.end);
        out.push_back('\t');
        append_double(out, r.height);
        out.push_back('\n');
    }
    return out;
}

inline std::vector<TruthRecord> parse_truth_records(std::string_view content) {
    detail::LineScanner scanner(content);
    std::string_view row;
    if (!scanner.next(row)) throw ParseError(1, "empty input");
    auto header = detail::split_tabs(row);
    if (header.size() < 3 || header[0] != "sequence_id" || header[1] != "start" ||
        header[2] != "end")
        throw ParseError(1, "header must start with sequence_id, start, end");
    bool has_height = header.size() >= 4 && header[3] == "height";
    std::vector<TruthRecord> rows;
    while (scanner.next(row)) {
        if (row.empty()) continue;
        auto fields = detail::split_tabs(row);
        if (fields.size() != header.size())
            throw ParseError(scanner.line, "expected " + std::to_string(header.size()) +
                                               " columns, found " + std::to_string(fields.size()));
        TruthRecord r;
        r.sequence_id = std::string(fields[0]);
        r.start = detail::parse_integer(fields[1], scanner.line);
        r.end = detail::parse_integer(fields[2], scanner.line);
        if (has_height) r.height = detail::parse_value(fields[3], scanner.line);
        rows.push_back(std::move(r));
    }
    return rows;
}

inline std::vector<TruthRecord> read_truth_records(const std::string& path) {
    return parse_truth_records(slurp_file(path));
}

}  // namespace shortseg
