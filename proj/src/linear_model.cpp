#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "harvest/classify.hpp"
#include "harvest/error.hpp"

namespace harvest::classify {

CountClass count_to_class(std::size_t events) {
    return events >= 3 ? CountClass::c3plus : static_cast<CountClass>(events);
}

std::string_view to_string(CountClass c) {
    switch (c) {
        case CountClass::c0: return "0";
        case CountClass::c1: return "1";
        case CountClass::c2: return "2";
        case CountClass::c3plus: return "3+";
    }
    return "0";
}

std::string_view to_string(Task t) {
    switch (t) {
        case Task::count4: return "count4";
        case Task::domain2: return "domain2";
        case Task::tags: return "tags";
    }
    return "count4";
}

Task parse_task(std::string_view s) {
    if (s == "count4" || s == "count") return Task::count4;
    if (s == "domain2" || s == "domain") return Task::domain2;
    if (s == "tags") return Task::tags;
    throw ArgumentError("unknown task '" + std::string(s) + "' (expected count4, domain2 or tags)");
}

// -- Adam -----------------------------------------------------------------

Adam::Adam(std::size_t size, AdamParams params) : params_(params), m_(size, 0.0), v_(size, 0.0) {}

void Adam::step(std::span<double> theta, std::span<const double> grad) {
    if (theta.size() != m_.size() || grad.size() != m_.size())
        throw ArgumentError("Adam state size does not match parameters");
    ++t_;
    const auto& p = params_;
    const double c1 = 1.0 - std::pow(p.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(p.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < theta.size(); ++i) {
        const double g = grad[i];
        m_[i] = p.beta1 * m_[i] + (1.0 - p.beta1) * g;
        v_[i] = p.beta2 * v_[i] + (1.0 - p.beta2) * g * g;
        theta[i] -= p.alpha * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + p.epsilon);
    }
}

// -- model ----------------------------------------------------------------

namespace {

std::size_t outputs_for(Task task, const std::vector<std::string>& tags) {
    switch (task) {
        case Task::count4: return kCountClasses;
        case Task::domain2: return 2;
        case Task::tags: return tags.size();
    }
    return 0;
}

}  // namespace

LinearModel::LinearModel(Task task, FeatureConfig features, std::vector<std::string> tag_names)
    : task_(task), features_(features), tag_names_(std::move(tag_names)), outputs_(outputs_for(task, tag_names_)) {
    if (features_.dim == 0 || (features_.dim & (features_.dim - 1)) != 0)
        throw ArgumentError("feature dimension must be a power of two");
    if (task_ == Task::tags && tag_names_.empty()) throw ArgumentError("tags model needs at least one tag");
    if (task_ != Task::tags && !tag_names_.empty()) throw ArgumentError("only the tags model takes tag names");
    params_.assign(outputs_ * features_.dim + outputs_, 0.0);
}

std::vector<double> LinearModel::logits(const FeatureVector& x) const {
    if (x.dim != dim())
        throw ArgumentError("feature dimension " + std::to_string(x.dim) + " does not match model dimension " +
                            std::to_string(dim()));
    std::vector<double> z(outputs_);
    const double* b = params_.data() + outputs_ * dim();
    for (std::size_t o = 0; o < outputs_; ++o) {
        const double* w = params_.data() + o * dim();
        double s = b[o];
        for (const auto& [i, v] : x.entries) s += w[i] * v;
        z[o] = s;
    }
    return z;
}

std::vector<double> softmax(std::span<const double> z) {
    std::vector<double> p(z.size());
    if (z.empty()) return p;
    const double mx = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) sum += p[i] = std::exp(z[i] - mx);
    for (auto& v : p) v /= sum;
    return p;
}

double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

std::vector<double> LinearModel::predict(const FeatureVector& x) const {
    auto z = logits(x);
    if (task_ != Task::tags) return softmax(z);
    for (auto& v : z) v = sigmoid(v);
    return z;
}

std::size_t LinearModel::predict_class(const FeatureVector& x) const {
    const auto p = predict(x);
    return static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
}

// -- loss -----------------------------------------------------------------

std::vector<double> target(const LinearModel& model, const Example& ex) {
    std::vector<double> y(model.outputs(), 0.0);
    switch (model.task()) {
        case Task::count4: y[static_cast<std::size_t>(ex.count_class())] = 1.0; break;
        case Task::domain2: y[ex.event_count > 0 ? 1 : 0] = 1.0; break;
        case Task::tags: {
            const auto& names = model.tag_names();
            for (const auto& t : ex.tags) {
                auto it = std::find(names.begin(), names.end(), t);
                if (it == names.end()) throw ValidationError("example tag '" + t + "' is not a model output");
                y[static_cast<std::size_t>(it - names.begin())] = 1.0;
            }
            break;
        }
    }
    return y;
}

namespace {

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double batch_loss(const LinearModel& model, std::span<const Example* const> batch, double l2,
                  std::vector<double>* grad) {
    if (batch.empty()) throw ArgumentError("loss needs a nonempty batch");
    const std::size_t D = model.dim(), K = model.outputs();
    const auto& theta = model.parameters();
    if (grad) grad->assign(theta.size(), 0.0);
    const double inv_b = 1.0 / static_cast<double>(batch.size());
    double total = 0.0;
    for (const Example* ex : batch) {
        const auto z = model.logits(ex->x);
        const auto y = target(model, *ex);
        std::vector<double> dz(K);
        if (model.task() == Task::tags) {
            for (std::size_t o = 0; o < K; ++o) {
                // -y log s(z) - (1-y) log(1-s(z)) = softplus(z) - y z
                total += softplus(z[o]) - y[o] * z[o];
                dz[o] = sigmoid(z[o]) - y[o];
            }
        } else {
            const double mx = *std::max_element(z.begin(), z.end());
            double sum = 0.0;
            for (double v : z) sum += std::exp(v - mx);
            const double lse = mx + std::log(sum);
            for (std::size_t o = 0; o < K; ++o) {
                total -= y[o] * (z[o] - lse);
                dz[o] = std::exp(z[o] - lse) - y[o];
            }
        }
        if (grad) {
            auto& g = *grad;
            for (std::size_t o = 0; o < K; ++o) {
                const double d = dz[o] * inv_b;
                double* row = g.data() + o * D;
                for (const auto& [i, v] : ex->x.entries) row[i] += d * v;
                g[K * D + o] += d;
            }
        }
    }
    total *= inv_b;
    if (l2 != 0.0) {
        double sq = 0.0;
        for (std::size_t i = 0; i < K * D; ++i) sq += theta[i] * theta[i];
        total += 0.5 * l2 * sq;
        if (grad)
            for (std::size_t i = 0; i < K * D; ++i) (*grad)[i] += l2 * theta[i];
    }
    return total;
}

}  // namespace

double loss(const LinearModel& model, std::span<const Example* const> batch, double l2) {
    return batch_loss(model, batch, l2, nullptr);
}

double loss_and_gradient(const LinearModel& model, std::span<const Example* const> batch, double l2,
                         std::vector<double>& grad) {
    return batch_loss(model, batch, l2, &grad);
}

// -- model file -----------------------------------------------------------
// "HLIN", version u8, task u8, dim u64, feature seed u64, outputs u32,
// tag count u32 then (u32 length, bytes) per tag, then parameters as
// little-endian IEEE doubles.

namespace {

constexpr char kModelMagic[4] = {'H', 'L', 'I', 'N'};
constexpr std::uint8_t kModelVersion = 1;

template <class T>
void put(std::ostream& out, T v) {
    unsigned char buf[sizeof(T)];
    for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <class T>
T get(std::istream& in) {
    unsigned char buf[sizeof(T)];
    if (!in.read(reinterpret_cast<char*>(buf), sizeof(T))) throw IoError("truncated model file");
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(static_cast<T>(buf[i]) << (8 * i));
    return v;
}

}  // namespace

void LinearModel::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write model file: " + path.string());
    out.write(kModelMagic, 4);
    put<std::uint8_t>(out, kModelVersion);
    put<std::uint8_t>(out, static_cast<std::uint8_t>(task_));
    put<std::uint64_t>(out, features_.dim);
    put<std::uint64_t>(out, features_.seed);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(outputs_));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(tag_names_.size()));
    for (const auto& t : tag_names_) {
        put<std::uint32_t>(out, static_cast<std::uint32_t>(t.size()));
        out.write(t.data(), static_cast<std::streamsize>(t.size()));
    }
    for (double v : params_) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        put<std::uint64_t>(out, bits);
    }
    if (!out) throw IoError("failed writing model file: " + path.string());
}

LinearModel LinearModel::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open model file: " + path.string());
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, kModelMagic, 4) != 0)
        throw IoError("not a model file: " + path.string());
    if (auto v = get<std::uint8_t>(in); v != kModelVersion)
        throw IoError("unsupported model file version " + std::to_string(v));
    const auto task_byte = get<std::uint8_t>(in);
    if (task_byte > static_cast<std::uint8_t>(Task::tags)) throw IoError("unknown task in model file");
    FeatureConfig fc;
    fc.dim = get<std::uint64_t>(in);
    fc.seed = get<std::uint64_t>(in);
    const auto outputs = get<std::uint32_t>(in);
    const auto ntags = get<std::uint32_t>(in);
    std::vector<std::string> tags(ntags);
    for (auto& t : tags) {
        t.resize(get<std::uint32_t>(in));
        if (!in.read(t.data(), static_cast<std::streamsize>(t.size()))) throw IoError("truncated model file");
    }
    LinearModel model(static_cast<Task>(task_byte), fc, std::move(tags));
    if (model.outputs() != outputs) throw IoError("model file output count is inconsistent");
    for (auto& v : model.params_) {
        const auto bits = get<std::uint64_t>(in);
        std::memcpy(&v, &bits, sizeof v);
    }
    return model;
}

}  // namespace harvest::classify
