#include "semret/experiments.hpp"

#include "semret/error.hpp"
#include "semret/lexical_index.hpp"
#include "semret/retrieval.hpp"
#include "semret/semantic_index.hpp"

#include <algorithm>
#include <fstream>
#include <set>

namespace semret {

EncoderConfig encoder_config_from(const KeyValueConfig& kv, EncoderConfig base)
{
    base.dim = kv.get_uint("dim", base.dim);
    base.depth = kv.get_uint("depth", base.depth);
    base.max_len = kv.get_uint("max_len", base.max_len);
    base.pool_layer = kv.get_uint("pool_layer", base.pool_layer);
    base.seed = kv.get_uint("seed", base.seed);
    base.validate();
    return base;
}

TrainConfig train_config_from(const KeyValueConfig& kv, TrainConfig base)
{
    base.margin = kv.get_double("margin", base.margin);
    base.learning_rate = kv.get_double("learning_rate", base.learning_rate);
    base.beta1 = kv.get_double("beta1", base.beta1);
    base.beta2 = kv.get_double("beta2", base.beta2);
    base.epsilon = kv.get_double("epsilon", base.epsilon);
    base.epochs = kv.get_uint("epochs", base.epochs);
    base.queries_per_batch = kv.get_uint("queries_per_batch", base.queries_per_batch);
    base.seed = kv.get_uint("seed", base.seed);
    base.workers = kv.get_uint("workers", base.workers);
    base.validate();
    return base;
}

SamplerConfig sampler_config_from(const KeyValueConfig& kv, SamplerConfig base)
{
    base.k_clusters = kv.get_uint("k_clusters", base.k_clusters);
    base.n_global = kv.get_uint("n_global", base.n_global);
    base.n_cluster = kv.get_uint("n_cluster", base.n_cluster);
    base.kmeans_iters = kv.get_uint("kmeans_iters", base.kmeans_iters);
    base.seed = kv.get_uint("seed", base.seed);
    base.validate();
    return base;
}

SyntheticCorpusConfig corpus_config_from(const KeyValueConfig& kv, SyntheticCorpusConfig base)
{
    base.n_concepts = kv.get_uint("n_concepts", base.n_concepts);
    base.surface_forms_per_concept = kv.get_uint("forms", base.surface_forms_per_concept);
    base.n_documents = kv.get_uint("n_documents", base.n_documents);
    base.n_queries = kv.get_uint("n_queries", base.n_queries);
    base.title_len = kv.get_uint("title_len", base.title_len);
    base.paraphrase_rate = kv.get_double("paraphrase_rate", base.paraphrase_rate);
    base.negatives_per_query = kv.get_uint("negatives_per_query", base.negatives_per_query);
    base.seed = kv.get_uint("seed", base.seed);
    base.validate();
    return base;
}

void ExperimentSpec::validate() const
{
    corpus.validate();
    encoder.validate();
    train.validate();
    sampler.validate();
    if (seeds.empty()) throw Error("experiment needs at least one seed");
    if (arms.empty() && !pool_sweep) throw Error("experiment needs at least one arm");
    std::set<std::string> names;
    for (const auto& a : arms) {
        if (a != kArmHuman && a != kArmGlobal && a != kArmCluster && a != kArmFull)
            throw Error("unknown arm '" + a + "'");
        if (!names.insert(a).second) throw Error("duplicate arm '" + a + "'");
    }
    if (ndcg_at.empty()) throw Error("ndcg_at must list at least one cutoff");
}

ExperimentSpec experiment_spec_from(const KeyValueConfig& kv)
{
    kv.require_known({"n_concepts", "forms", "n_documents", "n_queries", "title_len", "paraphrase_rate",
                      "negatives_per_query", "test_fraction", "min_freq", "dim", "depth", "max_len", "pool_layer",
                      "margin", "learning_rate", "beta1", "beta2", "epsilon", "epochs", "queries_per_batch",
                      "workers", "k_clusters", "n_global", "n_cluster", "kmeans_iters", "arms", "seeds",
                      "continue_from_m1", "evaluate_recall", "k_lexical", "k_semantic", "nprobe", "ndcg_at",
                      "pool_sweep"});
    ExperimentSpec spec;
    spec.corpus = corpus_config_from(kv);
    spec.test_fraction = kv.get_double("test_fraction", spec.test_fraction);
    spec.vocab_min_freq = kv.get_uint("min_freq", spec.vocab_min_freq);
    spec.encoder = encoder_config_from(kv);
    spec.train = train_config_from(kv);
    spec.sampler = sampler_config_from(kv);
    spec.arms = kv.get_list("arms", spec.arms);
    std::vector<std::string> seed_text;
    for (auto s : spec.seeds) seed_text.push_back(std::to_string(s));
    spec.seeds.clear();
    for (const auto& s : kv.get_list("seeds", seed_text)) {
        KeyValueConfig one;
        one.set("seed", s);
        spec.seeds.push_back(one.get_uint("seed", 0));
    }
    spec.continue_from_m1 = kv.get_bool("continue_from_m1", spec.continue_from_m1);
    spec.evaluate_recall = kv.get_bool("evaluate_recall", spec.evaluate_recall);
    spec.retrieval.k_lexical = kv.get_uint("k_lexical", spec.retrieval.k_lexical);
    spec.retrieval.k_semantic = kv.get_uint("k_semantic", spec.retrieval.k_semantic);
    spec.retrieval.nprobe = kv.get_uint("nprobe", spec.retrieval.nprobe);
    if (const auto list = kv.get("ndcg_at")) {
        spec.ndcg_at.clear();
        for (const auto& n : kv.get_list("ndcg_at", {})) {
            KeyValueConfig one;
            one.set("n", n);
            spec.ndcg_at.push_back(one.get_uint("n", 0));
        }
    }
    spec.pool_sweep = kv.get_bool("pool_sweep", spec.pool_sweep);
    spec.validate();
    return spec;
}

ExperimentSpec load_experiment_spec(const std::filesystem::path& path)
{
    return experiment_spec_from(KeyValueConfig::load(path));
}

const ArmResult& SeedRun::arm(std::string_view name) const
{
    for (const auto& a : arms)
        if (a.arm == name) return a;
    throw Error("no arm '" + std::string(name) + "' in run");
}

double TwoStageReport::mean_ndcg(std::string_view arm, std::size_t n) const
{
    if (runs.empty()) return 0.0;
    double total = 0.0;
    for (const auto& r : runs) total += r.arm(arm).ndcg.at.at(n);
    return total / static_cast<double>(runs.size());
}

PreparedRun prepare_run(const ExperimentSpec& spec, std::uint64_t seed)
{
    auto corpus_cfg = spec.corpus;
    corpus_cfg.seed = seed;
    auto corpus = generate_synthetic_corpus(corpus_cfg);
    auto [train, test] = split_by_query(corpus.judgments, spec.test_fraction, seed);

    std::vector<std::string> texts;
    for (const auto& d : corpus.docs->documents()) texts.push_back(d.title);
    for (const auto& g : train.groups()) texts.push_back(g.query);
    auto vocab = build_vocab(texts, spec.vocab_min_freq);

    auto enc = spec.encoder;
    enc.seed = seed;
    auto base = init_model(enc, vocab);
    return PreparedRun{std::move(corpus), std::move(train), std::move(test), std::move(vocab), std::move(base)};
}

namespace {

ArmResult evaluate_arm(const ExperimentSpec& spec, const PreparedRun& run, std::string name, const EncoderModel& model,
                       std::shared_ptr<const InvertedIndex> lexical)
{
    ArmResult r;
    r.arm = std::move(name);
    r.ndcg = evaluate_ranking(run.test, model, spec.ndcg_at, r.arm);
    if (spec.evaluate_recall) {
        auto index = std::make_shared<const SemanticIndex>(build_exact(embed_documents(model, *run.corpus.docs)));
        SearchEngine engine(run.corpus.docs, std::make_shared<const EncoderModel>(model), std::move(index),
                            std::move(lexical));
        r.recall = evaluate_retrieval(run.test, engine, spec.retrieval);
    }
    return r;
}

} // namespace

TwoStageReport run_two_stage(const ExperimentSpec& spec)
{
    spec.validate();
    TwoStageReport report;
    for (const auto seed : spec.seeds) {
        const auto run = prepare_run(spec, seed);
        auto train_cfg = spec.train;
        train_cfg.seed = seed;
        auto sampler_cfg = spec.sampler;
        sampler_cfg.seed = seed;

        std::shared_ptr<const InvertedIndex> lexical;
        if (spec.evaluate_recall) lexical = std::make_shared<const InvertedIndex>(build_lexical(*run.corpus.docs));

        SeedRun sr;
        sr.seed = seed;
        sr.human_judgments = run.train.judgment_count();

        auto m1 = run.base;
        auto m1_log = train(m1, run.train, train_cfg);
        const auto aug = augment_dataset(run.train, m1, sampler_cfg);
        sr.augmentation = aug.per_query;
        sr.augmented_judgments = aug.augmented.judgment_count();

        for (const auto& arm : spec.arms) {
            if (arm == kArmHuman) {
                auto r = evaluate_arm(spec, run, arm, m1, lexical);
                r.train_judgments = run.train.judgment_count();
                r.log = m1_log;
                sr.arms.push_back(std::move(r));
                continue;
            }
            const bool keep_global = arm == kArmGlobal || arm == kArmFull;
            const bool keep_cluster = arm == kArmCluster || arm == kArmFull;
            const auto data = filter_judgments(aug.augmented, [&](const Judgment& j) {
                return j.origin == Origin::Human || (j.origin == Origin::NegGlobal && keep_global)
                       || (j.origin == Origin::NegCluster && keep_cluster);
            });
            auto model = spec.continue_from_m1 ? m1 : run.base;
            auto log = train(model, data, train_cfg);
            auto r = evaluate_arm(spec, run, arm, model, lexical);
            r.train_judgments = data.judgment_count();
            r.log = std::move(log);
            sr.arms.push_back(std::move(r));
        }
        report.runs.push_back(std::move(sr));
    }
    return report;
}

std::vector<PoolLayerRow> run_pool_layer_sweep(const ExperimentSpec& spec)
{
    spec.validate();
    if (spec.encoder.depth < 2) throw Error("pool-layer sweep needs encoder depth >= 2");
    std::vector<PoolLayerRow> rows;
    const std::size_t cutoff[] = {3};
    for (const auto seed : spec.seeds) {
        auto run = prepare_run(spec, seed);
        auto train_cfg = spec.train;
        train_cfg.seed = seed;
        for (std::size_t layer = 1; layer <= spec.encoder.depth; ++layer) {
            auto enc = spec.encoder;
            enc.seed = seed;
            enc.pool_layer = layer;
            auto model = init_model(enc, run.vocab);
            train(model, run.train, train_cfg);
            const auto row = evaluate_ranking(run.test, model, cutoff);
            rows.push_back({seed, layer, row.at.at(3)});
        }
    }
    return rows;
}

namespace {

std::string file_safe(std::string name)
{
    for (auto& c : name)
        if (c == '+') c = '_';
    return name;
}

} // namespace

void write_two_stage_reports(const TwoStageReport& report, const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    std::ofstream summary(dir / "summary.tsv", std::ios::trunc);
    if (!summary) throw Error("cannot write " + (dir / "summary.tsv").string());
    summary.precision(6);
    summary << std::fixed;
    summary << "seed\tarm\ttrain_judgments\tndcg@1\tndcg@3\tndcg@5\trecall_lexical\trecall_semantic\trecall_hybrid\n";

    std::map<std::string, std::vector<NdcgRow>> ndcg_by_arm;
    for (const auto& run : report.runs) {
        for (const auto& a : run.arms) {
            auto at = [&](std::size_t n) {
                const auto it = a.ndcg.at.find(n);
                return it == a.ndcg.at.end() ? std::string("") : std::to_string(it->second);
            };
            summary << run.seed << '\t' << a.arm << '\t' << a.train_judgments << '\t' << at(1) << '\t' << at(3) << '\t'
                    << at(5) << '\t' << a.recall.lexical.mean_recall << '\t' << a.recall.semantic.mean_recall << '\t'
                    << a.recall.hybrid.mean_recall << '\n';
            auto row = a.ndcg;
            row.name = "seed" + std::to_string(run.seed);
            ndcg_by_arm[a.arm].push_back(std::move(row));
            write_recall_report(a.recall,
                                dir / ("recall_" + file_safe(a.arm) + "_seed" + std::to_string(run.seed) + ".tsv"));
        }
    }
    for (const auto& [arm, rows] : ndcg_by_arm) write_ndcg_report(rows, dir / ("ndcg_" + file_safe(arm) + ".tsv"));
}

void write_pool_sweep(const std::vector<PoolLayerRow>& rows, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out.precision(6);
    out << std::fixed << "seed\tpool_layer\tndcg@3\n";
    for (const auto& r : rows) out << r.seed << '\t' << r.pool_layer << '\t' << r.ndcg_at_3 << '\n';
}

} // namespace semret
