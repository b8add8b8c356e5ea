// "ARLF" model image, all integers and reals little-endian:
//
//   "ARLF" u32 version u32 flags(bit 0: attention + histories present)
//   u32 k u32 T u32 psi u32 dims u32 height_limit
//   f64 tau f64 eta f64 baseline_tau u64 samples_seen
//   preprocessor: 3 x (u32 n, n x (u32 len, bytes))   vocab of columns 1..3
//                 41 x (f64 min, f64 max)
//                 u32 m, m x u32 selected
//   forest:       T x (u32 nodes, nodes x node)
//                 node = u32 column (0xFFFFFFFF = leaf) then
//                        internal: f64 threshold u32 left u32 right
//                        leaf:     u32 size u32 depth
//   attention:    Wq Wk Wv (k x k row-major) bq bk bv, f64
//   histories:    T x k f64, oldest first

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "arlif/detector.hpp"
#include "arlif/error.hpp"

namespace arlif {

namespace {

constexpr std::uint8_t kMagic[4] = {'A', 'R', 'L', 'F'};
constexpr std::uint32_t kFlagAttention = 1u;

class Writer {
public:
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void f64s(std::span<const double> vs) {
        for (const double v : vs) f64(v);
    }
    void bytes(std::span<const std::uint8_t> b) { out_.insert(out_.end(), b.begin(), b.end()); }
    void str(const std::string& s) {
        u32(static_cast<std::uint32_t>(s.size()));
        out_.insert(out_.end(), s.begin(), s.end());
    }
    std::size_t size() const noexcept { return out_.size(); }
    std::vector<std::uint8_t> take() { return std::move(out_); }

private:
    std::vector<std::uint8_t> out_;
};

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

    std::uint32_t u32() {
        const auto b = take(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
        return v;
    }
    std::uint64_t u64() {
        const auto b = take(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    void f64s(std::span<double> out) {
        for (auto& v : out) v = f64();
    }
    std::string str() {
        const auto n = u32();
        const auto b = take(n);
        return std::string(b.begin(), b.end());
    }
    std::span<const std::uint8_t> take(std::size_t n) {
        if (in_.size() - pos_ < n) {
            throw Error(ErrorKind::TruncatedFile, "model image ends at byte " +
                                                      std::to_string(in_.size()) + ", needed " +
                                                      std::to_string(pos_ + n));
        }
        const auto b = in_.subspan(pos_, n);
        pos_ += n;
        return b;
    }
    bool done() const noexcept { return pos_ == in_.size(); }

private:
    std::span<const std::uint8_t> in_;
    std::size_t pos_ = 0;
};

struct Layout {
    std::vector<std::uint8_t> bytes;
    Segment forest;
    Segment attention;
};

Layout write_image(const Detector& det, ModelSections sections) {
    const auto& forest = det.forest();
    const auto& pre = det.preprocessor();
    const auto& params = det.params();

    Writer w;
    Layout layout;
    w.bytes(kMagic);
    w.u32(kModelVersion);
    w.u32(sections == ModelSections::Full ? kFlagAttention : 0u);
    w.u32(static_cast<std::uint32_t>(det.window()));
    w.u32(static_cast<std::uint32_t>(forest.size()));
    w.u32(static_cast<std::uint32_t>(forest.psi));
    w.u32(static_cast<std::uint32_t>(forest.dims));
    w.u32(static_cast<std::uint32_t>(forest.height_limit));
    w.f64(det.tau());
    w.f64(det.eta());
    w.f64(det.baseline_threshold());
    w.u64(det.samples_seen());

    for (const auto& tokens : pre.vocab) {
        w.u32(static_cast<std::uint32_t>(tokens.size()));
        for (const auto& t : tokens) w.str(t);
    }
    for (const auto& range : pre.min_max) {
        w.f64(range.min);
        w.f64(range.max);
    }
    w.u32(static_cast<std::uint32_t>(pre.m()));
    for (const auto c : pre.selected) w.u32(static_cast<std::uint32_t>(c));

    layout.forest.offset = w.size();
    for (const auto& tree : forest.trees) {
        w.u32(static_cast<std::uint32_t>(tree.nodes.size()));
        for (const auto& node : tree.nodes) {
            w.u32(node.column);
            if (node.is_leaf()) {
                w.u32(node.size);
                w.u32(node.depth);
            } else {
                w.f64(node.threshold);
                w.u32(node.left);
                w.u32(node.right);
            }
        }
    }
    layout.forest.length = w.size() - layout.forest.offset;

    if (sections == ModelSections::Full) {
        layout.attention.offset = w.size();
        w.f64s(params.wq.flat());
        w.f64s(params.wk.flat());
        w.f64s(params.wv.flat());
        w.f64s(params.bq);
        w.f64s(params.bk);
        w.f64s(params.bv);
        layout.attention.length = w.size() - layout.attention.offset;
        w.f64s(det.history().flat());
    }
    layout.bytes = w.take();
    return layout;
}

void corrupt_unless(bool ok, const std::string& what) {
    if (!ok) throw Error(ErrorKind::CorruptModel, what);
}

}  // namespace

std::vector<std::uint8_t> serialize(const Detector& det, ModelSections sections) {
    return write_image(det, sections).bytes;
}

Segment attention_segment(const Detector& det) {
    return write_image(det, ModelSections::Full).attention;
}

Segment forest_segment(const Detector& det) {
    return write_image(det, ModelSections::Full).forest;
}

std::size_t model_size_bytes(const Detector& det, ModelSections sections) {
    return serialize(det, sections).size();
}

Detector deserialize(std::span<const std::uint8_t> bytes) {
    Reader r(bytes);
    const auto magic = r.take(4);
    if (std::memcmp(magic.data(), kMagic, 4) != 0) {
        throw Error(ErrorKind::BadMagic, "not an ARLF model image");
    }
    const auto version = r.u32();
    if (version != kModelVersion) {
        throw Error(ErrorKind::VersionUnsupported, "model format version " + std::to_string(version) +
                                                       ", this build reads " +
                                                       std::to_string(kModelVersion));
    }
    const auto flags = r.u32();
    const std::size_t k = r.u32();
    const std::size_t trees = r.u32();
    auto forest = std::make_shared<IsolationForest>();
    forest->psi = r.u32();
    forest->dims = r.u32();
    forest->height_limit = r.u32();
    forest->c_psi = c_factor(forest->psi);
    const double tau = r.f64();
    const double eta = r.f64();
    const double baseline_tau = r.f64();
    const auto samples_seen = r.u64();
    corrupt_unless(k >= 1 && trees >= 1 && forest->psi >= 2, "header counts out of range");

    auto pre = std::make_shared<Preprocessor>();
    for (auto& tokens : pre->vocab) {
        const auto n = r.u32();
        for (std::uint32_t i = 0; i < n; ++i) tokens.push_back(r.str());
    }
    for (auto& range : pre->min_max) {
        range.min = r.f64();
        range.max = r.f64();
        corrupt_unless(range.min <= range.max, "column range with min > max");
    }
    const auto m = r.u32();
    corrupt_unless(m >= 1 && m <= kNumColumns && m == forest->dims, "bad selected feature count");
    for (std::uint32_t i = 0; i < m; ++i) {
        const auto c = r.u32();
        corrupt_unless(c < kNumColumns, "selected column out of range");
        pre->selected.push_back(c);
    }

    forest->trees.resize(trees);
    for (auto& tree : forest->trees) {
        const auto count = r.u32();
        corrupt_unless(count >= 1, "tree without nodes");
        tree.nodes.resize(count);
        for (std::uint32_t i = 0; i < count; ++i) {
            auto& node = tree.nodes[i];
            node.column = r.u32();
            if (node.is_leaf()) {
                node.size = r.u32();
                node.depth = r.u32();
            } else {
                node.threshold = r.f64();
                node.left = r.u32();
                node.right = r.u32();
                corrupt_unless(node.column < forest->dims, "split column out of range");
                corrupt_unless(node.left > i && node.left < count && node.right > i &&
                                   node.right < count,
                               "child index out of order");
            }
        }
    }

    AttentionParams params = AttentionParams::zeros(k);
    Matrix history(trees, k, kHistoryFill);
    if (flags & kFlagAttention) {
        r.f64s(params.wq.flat());
        r.f64s(params.wk.flat());
        r.f64s(params.wv.flat());
        r.f64s(params.bq);
        r.f64s(params.bk);
        r.f64s(params.bv);
        r.f64s(history.flat());
    } else {
        params.wv = Matrix::identity(k);
    }
    corrupt_unless(r.done(), "trailing bytes after model image");

    Detector det(std::move(forest), std::move(params), std::move(pre), tau, eta);
    det.set_baseline_threshold(baseline_tau);
    det.set_samples_seen(samples_seen);
    det.set_history(history);
    return det;
}

void save_model(const Detector& det, std::ostream& out) {
    const auto bytes = serialize(det);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorKind::Io, "failed writing model image");
}

Detector load_model(std::istream& in) {
    const std::vector<char> raw{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    return deserialize(std::span(reinterpret_cast<const std::uint8_t*>(raw.data()), raw.size()));
}

void save_model_file(const Detector& det, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write '" + path + "'");
    save_model(det, out);
}

Detector load_model_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open model '" + path + "'");
    return load_model(in);
}

}  // namespace arlif
