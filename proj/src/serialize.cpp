#include "dkn/serialize.hpp"

namespace dkn {

namespace {
constexpr char kNetMagic[9] = "DKNNET01";
constexpr char kCascadeMagic[9] = "DKNCASC1";
constexpr std::uint32_t kNetVersion = 1;
constexpr std::uint32_t kCascadeVersion = 1;
}  // namespace

void ByteWriter::write_file(const std::string& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out.write(reinterpret_cast<const char*>(buf_.data()),
              static_cast<std::streamsize>(buf_.size()));
    if (!out) throw std::runtime_error("write failed: " + path);
}

ByteReader ByteReader::from_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::streamsize size = in.tellg();
    in.seekg(0);
    std::vector<std::uint8_t> bytes(static_cast<std::size_t>(size));
    if (size > 0) in.read(reinterpret_cast<char*>(bytes.data()), size);
    if (!in) throw std::runtime_error("read failed: " + path);
    return ByteReader(std::move(bytes));
}

void ByteReader::expect_magic(const char (&m)[9]) {
    std::uint64_t at = pos_;
    const std::uint8_t* p = take(8);
    if (std::memcmp(p, m, 8) != 0)
        throw ParseError(std::string("bad magic, expected ") + m, at);
}

void write_network(const KernelNetwork& net, ByteWriter& w) {
    w.magic(kNetMagic);
    w.u32(kNetVersion);
    w.u32(static_cast<std::uint32_t>(net.arch.depth()));
    for (int n : net.arch.layer_sizes) w.u32(static_cast<std::uint32_t>(n));
    // row-major fan-in x fan-out; in-memory storage is the transpose
    for (const Mat& wt : net.wt)
        for (long q = 0; q < wt.cols(); ++q)
            for (long p = 0; p < wt.rows(); ++p) w.f64(wt(p, q));
}

KernelNetwork read_network(ByteReader& r) {
    r.expect_magic(kNetMagic);
    std::uint32_t version = r.u32();
    if (version != kNetVersion)
        throw ParseError("unsupported network version " + std::to_string(version),
                         r.offset() - 4);
    std::uint32_t layers = r.u32();
    if (layers < 2 || layers > 1024) throw ParseError("implausible layer count", r.offset() - 4);
    std::vector<int> sizes(layers);
    for (auto& s : sizes) {
        s = static_cast<int>(r.u32());
        if (s <= 0 || s > (1 << 20)) throw ParseError("implausible layer width", r.offset() - 4);
    }
    KernelNetwork net;
    net.arch = Architecture(sizes);
    for (std::uint32_t l = 0; l + 1 < layers; ++l) {
        Mat wt(sizes[l + 1], sizes[l]);
        for (long q = 0; q < wt.cols(); ++q)
            for (long p = 0; p < wt.rows(); ++p) wt(p, q) = r.f64();
        net.wt.push_back(std::move(wt));
    }
    return net;
}

void save_network(const KernelNetwork& net, const std::string& path) {
    ByteWriter w;
    write_network(net, w);
    w.write_file(path);
}

KernelNetwork load_network(const std::string& path) {
    ByteReader r = ByteReader::from_file(path);
    KernelNetwork net = read_network(r);
    r.expect_end();
    return net;
}

void save_cascade(const Cascade& cascade, const std::string& path,
                  std::uint64_t config_hash) {
    ByteWriter w;
    w.magic(kCascadeMagic);
    w.u32(kCascadeVersion);
    w.u64(config_hash);
    w.u32(static_cast<std::uint32_t>(cascade.bank.num_chunks));
    w.u32(static_cast<std::uint32_t>(cascade.bank.chunk_size));
    for (int q = 0; q < cascade.bank.num_chunks; ++q) w.f64(cascade.bank.scales[q]);
    w.u32(static_cast<std::uint32_t>(cascade.store.cols()));
    w.u32(static_cast<std::uint32_t>(cascade.store.rows()));
    for (long c = 0; c < cascade.store.cols(); ++c)
        for (long r = 0; r < cascade.store.rows(); ++r) w.f64(cascade.store(r, c));
    w.u32(static_cast<std::uint32_t>(cascade.stages.size()));
    for (const Stage& stage : cascade.stages) {
        write_network(stage.net, w);
        w.f64(stage.bias);
        w.f64(stage.threshold);
        w.u32(static_cast<std::uint32_t>(stage.sv_store.size()));
        for (std::size_t k = 0; k < stage.sv_store.size(); ++k) {
            w.u32(static_cast<std::uint32_t>(stage.sv_store[k]));
            w.f64(stage.sv_coeff[k]);
        }
    }
    w.write_file(path);
}

Cascade load_cascade(const std::string& path, std::uint64_t* config_hash) {
    ByteReader r = ByteReader::from_file(path);
    r.expect_magic(kCascadeMagic);
    std::uint32_t version = r.u32();
    if (version != kCascadeVersion)
        throw ParseError("unsupported cascade version " + std::to_string(version),
                         r.offset() - 4);
    std::uint64_t hash = r.u64();
    if (config_hash) *config_hash = hash;

    Cascade cascade;
    int n1 = static_cast<int>(r.u32());
    int chunk = static_cast<int>(r.u32());
    if (n1 <= 0 || chunk <= 0) throw ParseError("implausible bank layout", r.offset() - 8);
    Vec scales(n1);
    for (int q = 0; q < n1; ++q) scales[q] = r.f64();
    cascade.bank = make_bank(n1 * chunk, n1, std::move(scales));

    std::uint32_t m = r.u32();
    std::uint32_t d = r.u32();
    if (d == 0 || d != static_cast<std::uint32_t>(cascade.bank.dim()))
        throw ParseError("store dimension does not match bank", r.offset() - 4);
    cascade.store.resize(d, m);
    for (std::uint32_t c = 0; c < m; ++c)
        for (std::uint32_t row = 0; row < d; ++row) cascade.store(row, c) = r.f64();

    std::uint32_t T = r.u32();
    if (T == 0 || T > 1024) throw ParseError("implausible stage count", r.offset() - 4);
    for (std::uint32_t t = 0; t < T; ++t) {
        Stage stage;
        stage.net = read_network(r);
        stage.bias = r.f64();
        stage.threshold = r.f64();
        std::uint32_t nsv = r.u32();
        if (nsv > m) throw ParseError("stage references more vectors than stored",
                                      r.offset() - 4);
        stage.sv_store.resize(nsv);
        stage.sv_coeff.resize(nsv);
        for (std::uint32_t k = 0; k < nsv; ++k) {
            stage.sv_store[k] = static_cast<int>(r.u32());
            if (stage.sv_store[k] >= static_cast<int>(m))
                throw ParseError("support index out of range", r.offset() - 4);
            stage.sv_coeff[k] = r.f64();
        }
        cascade.stages.push_back(std::move(stage));
    }
    r.expect_end();
    return cascade;
}

}  // namespace dkn
