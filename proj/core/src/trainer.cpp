#include "semret/trainer.hpp"

#include "semret/error.hpp"
#include "semret/parallel.hpp"
#include "semret/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace semret {

void TrainConfig::validate() const
{
    if (!(margin > 0.0)) throw Error("margin must be > 0");
    if (!(learning_rate > 0.0)) throw Error("learning_rate must be > 0");
    if (epochs < 1) throw Error("epochs must be >= 1");
    if (queries_per_batch < 1) throw Error("queries_per_batch must be >= 1");
    if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0))
        throw Error("Adam betas must lie in [0, 1)");
}

std::vector<std::pair<std::size_t, std::size_t>> make_pairs(std::span<const int> labels)
{
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < labels.size(); ++i)
        for (std::size_t j = i + 1; j < labels.size(); ++j) {
            if (labels[i] > labels[j])
                pairs.emplace_back(i, j);
            else if (labels[i] < labels[j])
                pairs.emplace_back(j, i);
        }
    return pairs;
}

double hinge_loss(std::span<const int> labels, std::span<const double> scores, double margin)
{
    if (labels.size() != scores.size()) throw Error("hinge_loss: labels and scores differ in length");
    const auto pairs = make_pairs(labels);
    if (pairs.empty()) return 0.0;
    double total = 0.0;
    for (auto [i, j] : pairs)
        total += std::max(0.0, margin - (labels[i] - labels[j]) * (scores[i] - scores[j]));
    return total / static_cast<double>(pairs.size());
}

double hinge_loss(std::span<const PairScore> group, double margin)
{
    std::vector<int> labels;
    std::vector<double> scores;
    for (const auto& p : group) {
        labels.push_back(p.label);
        scores.push_back(p.score);
    }
    return hinge_loss(labels, scores, margin);
}

std::vector<TrainingGroup> prepare_groups(const JudgmentSet& js, const EncoderModel& model)
{
    std::vector<TrainingGroup> out;
    out.reserve(js.query_count());
    for (const auto& g : js.groups()) {
        TrainingGroup tg;
        tg.query = g.query;
        tg.query_tokens = model.tokenize(g.query);
        for (const auto& j : g.judgments) {
            tg.doc_tokens.push_back(model.tokenize(js.docs().at(j.doc_id).title));
            tg.labels.push_back(j.relevance);
        }
        out.push_back(std::move(tg));
    }
    return out;
}

namespace {

// Loss of one group; when `grads` is non-empty the group's gradient scaled
// by `weight` is accumulated into it.
double group_loss(const EncoderModel& model, const TrainingGroup& g, double margin, double weight,
                  std::span<double> grads)
{
    const auto pairs = make_pairs(g.labels);
    if (pairs.empty()) return 0.0;

    const auto q = forward(model, g.query_tokens);
    std::vector<ForwardTrace> docs;
    docs.reserve(g.doc_tokens.size());
    std::vector<double> scores;
    for (const auto& t : g.doc_tokens) {
        docs.push_back(forward(model, t));
        scores.push_back(dot(q.output, docs.back().output));
    }

    const double inv_m = 1.0 / static_cast<double>(pairs.size());
    double loss = 0.0;
    std::vector<double> dscore(scores.size(), 0.0);
    for (auto [i, j] : pairs) {
        const double gap = g.labels[i] - g.labels[j];
        const double term = margin - gap * (scores[i] - scores[j]);
        if (term > 0.0) {
            loss += term;
            dscore[i] -= gap;
            dscore[j] += gap;
        }
    }
    loss *= inv_m;
    if (!std::isfinite(loss)) throw Error("non-finite loss for query '" + g.query + "'");
    if (grads.empty()) return loss;

    const auto dim = model.dim();
    std::vector<double> gq(dim, 0.0), gd(dim);
    for (std::size_t d = 0; d < docs.size(); ++d) {
        const double s = dscore[d] * inv_m * weight;
        if (s == 0.0) continue;
        for (std::size_t k = 0; k < dim; ++k) {
            gq[k] += s * docs[d].output[k];
            gd[k] = s * q.output[k];
        }
        backward(model, docs[d], gd, grads);
    }
    backward(model, q, gq, grads);
    return loss;
}

} // namespace

double batch_loss(const EncoderModel& model, std::span<const TrainingGroup> batch, double margin)
{
    if (batch.empty()) return 0.0;
    double total = 0.0;
    for (const auto& g : batch) total += group_loss(model, g, margin, 0.0, {});
    return total / static_cast<double>(batch.size());
}

LossAndGradient loss_gradients(const EncoderModel& model, std::span<const TrainingGroup> batch,
                               const TrainConfig& cfg)
{
    LossAndGradient out;
    out.grads.assign(model.parameter_count(), 0.0);
    if (batch.empty()) return out;
    const double weight = 1.0 / static_cast<double>(batch.size());

    std::vector<double> losses(batch.size(), 0.0);
    if (cfg.workers <= 1) {
        // Accumulating straight into the output visits groups in batch order,
        // the same reduction order as the parallel path below.
        std::vector<double> local(model.parameter_count());
        for (std::size_t i = 0; i < batch.size(); ++i) {
            std::fill(local.begin(), local.end(), 0.0);
            losses[i] = group_loss(model, batch[i], cfg.margin, weight, local);
            for (std::size_t k = 0; k < local.size(); ++k) out.grads[k] += local[k];
        }
    } else {
        std::vector<std::vector<double>> per_group(batch.size());
        parallel_for(
            batch.size(),
            [&](std::size_t i) {
                per_group[i].assign(model.parameter_count(), 0.0);
                losses[i] = group_loss(model, batch[i], cfg.margin, weight, per_group[i]);
            },
            cfg.workers);
        for (const auto& g : per_group)
            for (std::size_t k = 0; k < g.size(); ++k) out.grads[k] += g[k];
    }
    for (double l : losses) out.loss += l;
    out.loss *= weight;
    return out;
}

void adam_update(std::span<double> params, AdamState& state, std::span<const double> grads,
                 const TrainConfig& cfg)
{
    if (state.m.size() != params.size() || state.v.size() != params.size() || grads.size() != params.size())
        throw Error("adam_update: shape mismatch");
    ++state.t;
    const double t = static_cast<double>(state.t);
    const double bc1 = 1.0 - std::pow(cfg.beta1, t);
    const double bc2 = 1.0 - std::pow(cfg.beta2, t);
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grads[i];
        state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * g;
        state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * g * g;
        const double m_hat = state.m[i] / bc1;
        const double v_hat = state.v[i] / bc2;
        params[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
    }
}

void adam_step(EncoderModel& model, AdamState& state, std::span<const double> grads, const TrainConfig& cfg)
{
    auto p = model.parameters();
    adam_update(p, state, grads, cfg);
    for (auto& x : p) x = static_cast<double>(static_cast<float>(x));
}

TrainLog train(EncoderModel& model, const JudgmentSet& train_set, const TrainConfig& cfg)
{
    cfg.validate();
    if (train_set.empty()) throw Error("train: empty training set");
    const auto groups = prepare_groups(train_set, model);
    AdamState state(model.parameter_count());
    TrainLog log;

    std::vector<std::size_t> order(groups.size());
    std::vector<TrainingGroup> batch;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        Rng rng(mix_seed(cfg.seed, 0x7a11, epoch));
        shuffle(order, rng);

        double epoch_total = 0.0;
        for (std::size_t start = 0; start < order.size(); start += cfg.queries_per_batch) {
            const auto end = std::min(order.size(), start + cfg.queries_per_batch);
            batch.clear();
            for (auto i = start; i < end; ++i) batch.push_back(groups[order[i]]);
            auto [loss, grads] = loss_gradients(model, batch, cfg);
            adam_step(model, state, grads, cfg);
            log.batch_losses.push_back(loss);
            epoch_total += loss * static_cast<double>(batch.size());
            ++log.steps;
        }
        log.epoch_losses.push_back(epoch_total / static_cast<double>(groups.size()));
    }
    model.refresh_id();
    return log;
}

void save_train_log(const TrainLog& log, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out.precision(9);
    out << "step\tloss\n";
    for (std::size_t i = 0; i < log.batch_losses.size(); ++i) out << (i + 1) << '\t' << log.batch_losses[i] << '\n';
}

} // namespace semret
