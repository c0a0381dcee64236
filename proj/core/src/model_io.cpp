#include "zsh/model.hpp"

#include "binary_io.hpp"
#include "zsh/error.hpp"

#include <fstream>

namespace zsh {
namespace {

constexpr std::string_view kModelMagic = "ZSHM";
constexpr std::uint32_t kModelVersion = 1;

} // namespace

void write_model(const ZshModel& model, std::ostream& out)
{
    model.validate();
    detail::LeWriter w(out);
    w.magic(kModelMagic);
    w.u32(kModelVersion);
    w.u64(static_cast<std::uint64_t>(model.m()));
    w.u64(static_cast<std::uint64_t>(model.l()));
    w.u64(static_cast<std::uint64_t>(model.e()));
    w.u64(static_cast<std::uint64_t>(model.d()));
    w.matrix(model.P);
    w.matrix(model.W);
    w.matrix(model.R);
    w.matrix(model.anchors.anchors);
    w.f64(model.anchors.delta);
    w.u64(model.anchors.seed);

    const auto& h = model.hyper;
    w.f64(h.lambda);
    w.f64(h.alpha);
    w.f64(h.beta);
    w.f64(h.gamma);
    w.f64(h.tol);
    w.u64(static_cast<std::uint64_t>(h.max_iters));
    w.u64(static_cast<std::uint64_t>(h.dcc_max_passes));
    w.u64(h.seed);
}

ZshModel read_model(std::istream& in)
{
    detail::LeReader r(in, "model file");
    r.expect_magic(kModelMagic);
    const auto version = r.u32();
    if (version != kModelVersion) {
        throw LoadError(LoadError::Reason::version, 0,
                        "model file: unsupported version " + std::to_string(version));
    }
    const auto m = static_cast<Index>(r.u64());
    const auto l = static_cast<Index>(r.u64());
    const auto e = static_cast<Index>(r.u64());
    const auto d = static_cast<Index>(r.u64());
    constexpr Index kLimit = Index{1} << 24;
    if (m < 1 || l < 1 || e < 1 || d < 1 || m > kLimit || l > kLimit || e > kLimit || d > kLimit) {
        throw LoadError(LoadError::Reason::bad_header, 0, "model file: implausible dimensions");
    }

    ZshModel model;
    model.P = r.matrix(m, l);
    model.W = r.matrix(l, e);
    model.R = r.matrix(e, e);
    model.anchors.anchors = r.matrix(d, m);
    model.anchors.delta = r.f64();
    model.anchors.seed = r.u64();

    auto& h = model.hyper;
    h.lambda = r.f64();
    h.alpha = r.f64();
    h.beta = r.f64();
    h.gamma = r.f64();
    h.tol = r.f64();
    h.max_iters = static_cast<int>(r.u64());
    h.dcc_max_passes = static_cast<int>(r.u64());
    h.seed = r.u64();
    h.code_length = l;

    if (!r.at_eof()) {
        throw LoadError(LoadError::Reason::bad_header, 0, "model file: trailing bytes");
    }
    try {
        model.validate();
    } catch (const ValidationError& err) {
        throw LoadError(LoadError::Reason::parse, 0, std::string("model file: ") + err.what());
    }
    return model;
}

void save_model(const ZshModel& model, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot open " + path.string() + " for writing");
    write_model(model, out);
    if (!out) throw ValidationError("failed writing " + path.string());
}

ZshModel load_model(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw LoadError(LoadError::Reason::open_failed, 0, "cannot open " + path.string());
    }
    return read_model(in);
}

} // namespace zsh
