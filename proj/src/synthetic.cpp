#include "arlif/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>

#include "arlif/random.hpp"

namespace arlif {

namespace {

struct Row {
    std::array<std::string, kNumColumns> fields;
    std::string label;
    int difficulty = 20;
};

class Generator {
public:
    explicit Generator(std::uint64_t seed) : rng_(splitmix64(seed ^ 0x5EEDull)) {}

    double u() { return uniform01(rng_); }
    double between(double lo, double hi) { return uniform(rng_, lo, hi); }
    int integer(int lo, int hi) {
        return lo + static_cast<int>(uniform_index(rng_, static_cast<std::uint64_t>(hi - lo + 1)));
    }
    bool chance(double p) { return u() < p; }
    double gauss() {
        const double a = std::max(u(), 1e-300);
        return std::sqrt(-2.0 * std::log(a)) * std::cos(2.0 * 3.14159265358979323846 * u());
    }
    long lognormal(double mu, double sigma) {
        return std::lround(std::exp(mu + sigma * gauss()));
    }
    template <class T, std::size_t N>
    const T& pick(const std::array<T, N>& options) {
        return options[uniform_index(rng_, N)];
    }

    Row normal();
    Row attack();

private:
    Rng rng_;
};

std::string fmt_rate(double v) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%.2f", std::clamp(v, 0.0, 1.0));
    return buf;
}

std::string fmt_int(long v) { return std::to_string(std::max(0L, v)); }

// Everything not set explicitly is a zero count or rate.
Row blank() {
    Row row;
    for (std::size_t c = 0; c < kNumColumns; ++c) {
        row.fields[c] = (c >= 24 && c <= 30) || c >= 33 ? "0.00" : "0";
    }
    return row;
}

void set_rate(Row& row, std::size_t column, double v) { row.fields[column] = fmt_rate(v); }
void set_int(Row& row, std::size_t column, long v) { row.fields[column] = fmt_int(v); }

Row Generator::normal() {
    Row row = blank();
    const double p = u();
    const char* protocol = p < 0.8 ? "tcp" : p < 0.95 ? "udp" : "icmp";
    row.fields[1] = protocol;
    if (p < 0.8) {
        static constexpr std::array<const char*, 6> services = {"http", "http", "smtp",
                                                                "ftp_data", "ftp", "telnet"};
        row.fields[2] = pick(services);
        row.fields[3] = chance(0.96) ? "SF" : (chance(0.5) ? "RSTO" : "S1");
        set_int(row, 11, 1);  // logged_in
    } else if (p < 0.95) {
        static constexpr std::array<const char*, 3> services = {"domain_u", "private", "ntp_u"};
        row.fields[2] = pick(services);
        row.fields[3] = "SF";
    } else {
        static constexpr std::array<const char*, 2> services = {"eco_i", "ecr_i"};
        row.fields[2] = pick(services);
        row.fields[3] = "SF";
    }
    set_int(row, 0, chance(0.85) ? 0 : integer(1, 300));
    set_int(row, 4, lognormal(5.4, 1.0));
    set_int(row, 5, p < 0.8 ? lognormal(7.5, 1.5) : lognormal(4.5, 0.8));
    if (chance(0.1)) set_int(row, 9, integer(1, 3));  // hot
    const int count = integer(1, 25);
    set_int(row, 22, count);
    set_int(row, 23, integer(1, count + 5));
    if (chance(0.05)) set_rate(row, 24, between(0.0, 0.2));
    if (chance(0.05)) set_rate(row, 26, between(0.0, 0.2));
    set_rate(row, 28, between(0.85, 1.0));
    set_rate(row, 29, between(0.0, 0.08));
    set_rate(row, 30, chance(0.6) ? 0.0 : between(0.0, 0.3));
    const int host_count = integer(1, 255);
    set_int(row, 31, host_count);
    set_int(row, 32, integer(std::max(1, host_count / 3), 255));
    set_rate(row, 33, between(0.6, 1.0));
    set_rate(row, 34, between(0.0, 0.06));
    set_rate(row, 35, between(0.0, 0.3));
    set_rate(row, 36, between(0.0, 0.05));
    set_rate(row, 37, chance(0.9) ? 0.0 : between(0.0, 0.1));
    set_rate(row, 39, chance(0.9) ? 0.0 : between(0.0, 0.1));
    row.label = "normal";
    row.difficulty = integer(18, 21);
    return row;
}

Row Generator::attack() {
    // Low-and-slow attacks start from a normal-looking profile.
    if (chance(0.12)) {
        Row row = normal();
        row.fields[3] = chance(0.5) ? "SF" : "RSTO";
        set_int(row, 10, integer(0, 2));  // num_failed_logins
        set_int(row, 9, integer(0, 5));
        set_rate(row, 37, between(0.0, 0.4));
        row.label = chance(0.5) ? "guess_passwd" : "warezclient";
        row.difficulty = integer(8, 15);
        return row;
    }

    Row row = blank();
    const double kind = u();
    if (kind < 0.45) {
        row.fields[1] = "tcp";
        static constexpr std::array<const char*, 4> services = {"private", "other", "http", "telnet"};
        row.fields[2] = pick(services);
        row.fields[3] = chance(0.9) ? "S0" : "REJ";
        const int count = integer(90, 511);
        set_int(row, 22, count);
        set_int(row, 23, integer(1, 30));
        set_rate(row, 24, between(0.9, 1.0));
        set_rate(row, 25, between(0.9, 1.0));
        set_rate(row, 28, between(0.0, 0.1));
        set_rate(row, 29, between(0.04, 0.1));
        set_int(row, 31, 255);
        set_int(row, 32, integer(1, 30));
        set_rate(row, 33, between(0.0, 0.1));
        set_rate(row, 34, between(0.03, 0.1));
        set_rate(row, 37, between(0.9, 1.0));
        set_rate(row, 38, between(0.9, 1.0));
        row.label = "neptune";
    } else if (kind < 0.65) {
        row.fields[1] = "icmp";
        row.fields[2] = "ecr_i";
        row.fields[3] = "SF";
        set_int(row, 4, chance(0.7) ? 1032 : 520);
        const int count = integer(300, 511);
        set_int(row, 22, count);
        set_int(row, 23, count);
        set_rate(row, 28, 1.0);
        set_int(row, 31, 255);
        set_int(row, 32, 255);
        set_rate(row, 33, 1.0);
        set_rate(row, 35, between(0.8, 1.0));
        row.label = "smurf";
    } else if (kind < 0.85) {
        row.fields[1] = "tcp";
        row.fields[2] = "private";
        row.fields[3] = chance(0.6) ? "REJ" : "RSTR";
        set_int(row, 0, chance(0.8) ? 0 : integer(1, 5000));
        set_int(row, 22, integer(1, 5));
        set_int(row, 23, integer(1, 5));
        set_rate(row, 26, between(0.5, 1.0));
        set_rate(row, 27, between(0.5, 1.0));
        set_rate(row, 28, between(0.5, 1.0));
        set_rate(row, 30, between(0.0, 1.0));
        set_int(row, 31, integer(1, 60));
        set_int(row, 32, integer(1, 60));
        set_rate(row, 33, between(0.0, 0.5));
        set_rate(row, 34, between(0.1, 1.0));
        set_rate(row, 35, between(0.5, 1.0));
        set_rate(row, 36, between(0.1, 0.5));
        set_rate(row, 39, between(0.5, 1.0));
        set_rate(row, 40, between(0.5, 1.0));
        row.label = chance(0.6) ? "portsweep" : "satan";
    } else {
        row.fields[1] = "tcp";
        static constexpr std::array<const char*, 3> services = {"telnet", "ftp", "login"};
        row.fields[2] = pick(services);
        row.fields[3] = chance(0.7) ? "SF" : "RSTO";
        set_int(row, 0, integer(0, 10));
        set_int(row, 4, lognormal(4.0, 0.5));
        set_int(row, 5, lognormal(4.5, 0.5));
        set_int(row, 9, integer(0, 2));
        set_int(row, 10, integer(1, 5));
        set_int(row, 22, integer(1, 3));
        set_int(row, 23, integer(1, 3));
        set_rate(row, 28, 1.0);
        set_int(row, 31, integer(1, 30));
        set_int(row, 32, integer(1, 30));
        set_rate(row, 33, between(0.5, 1.0));
        set_rate(row, 35, between(0.0, 1.0));
        set_rate(row, 39, between(0.0, 0.5));
        row.label = "guess_passwd";
    }
    row.difficulty = integer(15, 21);
    return row;
}

}  // namespace

std::vector<std::string> synthetic_lines(std::size_t count, std::uint64_t seed, DatasetFormat format,
                                         double attack_fraction) {
    Generator gen(seed);
    std::vector<std::string> lines;
    lines.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const Row row = gen.chance(attack_fraction) ? gen.attack() : gen.normal();
        std::string line;
        for (const auto& f : row.fields) {
            line += f;
            line += ',';
        }
        line += row.label;
        if (format == DatasetFormat::NslKdd) {
            line += ',';
            line += std::to_string(row.difficulty);
        } else {
            line += '.';
        }
        lines.push_back(std::move(line));
    }
    return lines;
}

std::vector<Record> synthetic_records(std::size_t count, std::uint64_t seed, double attack_fraction) {
    std::vector<Record> records;
    records.reserve(count);
    for (const auto& line : synthetic_lines(count, seed, DatasetFormat::NslKdd, attack_fraction)) {
        records.push_back(parse_record(line, DatasetFormat::NslKdd));
    }
    return records;
}

}  // namespace arlif
