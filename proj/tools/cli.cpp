#include "cli.hpp"

#include "semret/corpus.hpp"
#include "semret/encoder.hpp"
#include "semret/error.hpp"
#include "semret/eval.hpp"
#include "semret/experiments.hpp"
#include "semret/key_value.hpp"
#include "semret/lexical_index.hpp"
#include "semret/retrieval.hpp"
#include "semret/sampler.hpp"
#include "semret/semantic_index.hpp"
#include "semret/server.hpp"
#include "semret/text.hpp"
#include "semret/trainer.hpp"

#include <CLI11.hpp>

#include <functional>
#include <iostream>
#include <map>
#include <memory>

namespace semret {
namespace {

const std::vector<std::string_view> kCorpusKeys{"n_concepts", "forms", "n_documents", "n_queries", "title_len",
                                                "seed", "paraphrase_rate", "negatives_per_query", "test_fraction"};
const std::vector<std::string_view> kTrainKeys{"dim", "depth", "max_len", "pool_layer", "seed", "margin",
                                               "learning_rate", "beta1", "beta2", "epsilon", "epochs",
                                               "queries_per_batch", "workers", "min_freq"};
const std::vector<std::string_view> kServeKeys{"docs", "model", "semantic_index", "lexical_index", "host", "port",
                                               "threads", "k_semantic", "k_lexical", "nprobe", "final_k",
                                               "score_mode"};

/// Flags that mirror config keys are collected as raw strings and laid
/// over the config file, so both paths share one parser.
struct Overrides {
    std::map<std::string, std::string> values;

    void add(CLI::App* app, std::string_view key, const std::string& help)
    {
        std::string flag = "--" + std::string(key);
        for (auto& c : flag)
            if (c == '_') c = '-';
        const std::string k(key);
        app->add_option_function<std::string>(
            flag, [this, k](const std::string& v) { values[k] = v; }, help);
    }

    void add_all(CLI::App* app, const std::vector<std::string_view>& keys)
    {
        for (auto k : keys) add(app, k, "config key " + std::string(k));
    }

    KeyValueConfig apply(const std::string& config_path) const
    {
        auto kv = config_path.empty() ? KeyValueConfig{} : KeyValueConfig::load(config_path);
        for (const auto& [k, v] : values) kv.set(k, v);
        return kv;
    }
};

std::vector<std::string> judged_texts(const DocumentStore& docs, const JudgmentSet& js)
{
    std::vector<std::string> texts;
    texts.reserve(docs.size() + js.query_count());
    for (const auto& d : docs.documents()) texts.push_back(d.title);
    for (const auto& g : js.groups()) texts.push_back(g.query);
    return texts;
}

std::shared_ptr<const DocumentStore> shared_docs(const std::string& path)
{
    return std::make_shared<const DocumentStore>(load_documents(path));
}

} // namespace

int cli_main(int argc, const char* const* argv)
{
    return cli_main(argc, argv, std::cout, std::cerr);
}

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"semret: hybrid semantic + lexical retrieval toolkit", "semret"};
    app.require_subcommand(1);
    std::function<void()> action;

    // gen-corpus
    auto* gen = app.add_subcommand("gen-corpus", "Generate a synthetic paraphrase corpus");
    std::string gen_out, gen_config;
    Overrides gen_ov;
    gen->add_option("--out", gen_out, "Output directory")->required();
    gen->add_option("--config", gen_config, "key=value corpus config");
    gen_ov.add_all(gen, kCorpusKeys);
    gen->callback([&] {
        action = [&] {
            const auto kv = gen_ov.apply(gen_config);
            kv.require_known(kCorpusKeys);
            const auto cfg = corpus_config_from(kv);
            const auto corpus = generate_synthetic_corpus(cfg);
            save_synthetic_corpus(corpus, gen_out);
            out << "documents\t" << corpus.docs->size() << "\nqueries\t" << corpus.judgments.query_count()
                << "\njudgments\t" << corpus.judgments.judgment_count() << "\n";
            if (kv.contains("test_fraction")) {
                auto [train_set, test_set] =
                    split_by_query(corpus.judgments, kv.get_double("test_fraction", 0.2), cfg.seed);
                const std::filesystem::path dir(gen_out);
                save_judgments(train_set, dir / "train.tsv");
                save_judgments(test_set, dir / "test.tsv");
                out << "train_queries\t" << train_set.query_count() << "\ntest_queries\t" << test_set.query_count()
                    << "\n";
            }
        };
    });

    // train
    auto* tr = app.add_subcommand("train", "Train an encoder on judged query groups");
    std::string tr_judgments, tr_docs, tr_config, tr_out, tr_log, tr_init;
    Overrides tr_ov;
    tr->add_option("--judgments", tr_judgments, "Judgments TSV")->required();
    tr->add_option("--docs", tr_docs, "Documents TSV")->required();
    tr->add_option("--config", tr_config, "key=value training config");
    tr->add_option("--out", tr_out, "Output model file")->required();
    tr->add_option("--log", tr_log, "Write the step/loss log here");
    tr->add_option("--init", tr_init, "Start from this model instead of a fresh initialization");
    tr_ov.add_all(tr, kTrainKeys);
    tr->callback([&] {
        action = [&] {
            const auto kv = tr_ov.apply(tr_config);
            kv.require_known(kTrainKeys);
            auto docs = shared_docs(tr_docs);
            const auto js = load_judgments(tr_judgments, docs);
            const auto enc = encoder_config_from(kv);
            const auto cfg = train_config_from(kv);
            auto model = [&] {
                if (!tr_init.empty()) return load_model(tr_init);
                const auto texts = judged_texts(*docs, js);
                return init_model(enc, build_vocab(texts, kv.get_uint("min_freq", 1)));
            }();
            const auto log = train(model, js, cfg);
            save_model(model, tr_out);
            if (!tr_log.empty()) save_train_log(log, tr_log);
            out << "steps\t" << log.steps << "\n";
            for (std::size_t e = 0; e < log.epoch_losses.size(); ++e)
                out << "epoch " << e + 1 << " loss\t" << log.epoch_losses[e] << "\n";
        };
    });

    // sample-negatives
    auto* sn = app.add_subcommand("sample-negatives", "Augment judgments with NEG_GLOBAL and NEG_CLUSTER negatives");
    std::string sn_judgments, sn_docs, sn_model, sn_out;
    SamplerConfig sn_cfg;
    sn->add_option("--judgments", sn_judgments, "Judgments TSV")->required();
    sn->add_option("--docs", sn_docs, "Documents TSV")->required();
    sn->add_option("--model", sn_model, "Stage-1 model")->required();
    sn->add_option("--out", sn_out, "Augmented judgments TSV (with origin column)")->required();
    sn->add_option("--n-global", sn_cfg.n_global, "Global negatives per query")->capture_default_str();
    sn->add_option("--n-cluster", sn_cfg.n_cluster, "Cluster negatives per query")->capture_default_str();
    sn->add_option("--k,--k-clusters", sn_cfg.k_clusters, "k-means clusters")->capture_default_str();
    sn->add_option("--kmeans-iters", sn_cfg.kmeans_iters, "Lloyd iterations")->capture_default_str();
    sn->add_option("--seed", sn_cfg.seed, "Sampling seed")->capture_default_str();
    sn->callback([&] {
        action = [&] {
            sn_cfg.validate();
            auto docs = shared_docs(sn_docs);
            const auto js = load_judgments(sn_judgments, docs);
            const auto model = load_model(sn_model);
            const auto result = augment_dataset(js, model, sn_cfg);
            save_judgments(result.augmented, sn_out, true);
            std::size_t short_queries = 0;
            for (const auto& q : result.per_query)
                if (q.global < sn_cfg.n_global || q.cluster_added < sn_cfg.n_cluster) ++short_queries;
            out << "judgments\t" << js.judgment_count() << " -> " << result.augmented.judgment_count()
                << "\nshort_queries\t" << short_queries << "\n";
        };
    });

    // embed
    auto* em = app.add_subcommand("embed", "Embed every document title");
    std::string em_docs, em_model, em_out;
    em->add_option("--docs", em_docs, "Documents TSV")->required();
    em->add_option("--model", em_model, "Model file")->required();
    em->add_option("--out", em_out, "Embeddings file")->required();
    em->callback([&] {
        action = [&] {
            const auto docs = load_documents(em_docs);
            const auto model = load_model(em_model);
            const auto table = embed_documents(model, docs);
            save_embeddings(table, em_out);
            out << "embedded\t" << table.size() << "\tdim\t" << table.dim << "\n";
        };
    });

    // build-semantic-index
    auto* bs = app.add_subcommand("build-semantic-index", "Build an exact or IVF vector index");
    std::string bs_embeddings, bs_out;
    bool bs_ivf = false, bs_cosine = false;
    std::size_t bs_k = 100, bs_iters = 25;
    std::uint64_t bs_seed = 0;
    bs->add_option("--embeddings", bs_embeddings, "Embeddings file")->required();
    bs->add_option("--out", bs_out, "Index file")->required();
    bs->add_flag("--ivf", bs_ivf, "Build an IVF index instead of an exact one");
    bs->add_option("--k-clusters", bs_k, "IVF coarse centroids")->capture_default_str();
    bs->add_option("--kmeans-iters", bs_iters, "IVF k-means iterations")->capture_default_str();
    bs->add_option("--seed", bs_seed, "IVF k-means seed")->capture_default_str();
    bs->add_flag("--cosine", bs_cosine, "L2-normalize rows and queries");
    bs->callback([&] {
        action = [&] {
            const auto table = load_embeddings(bs_embeddings);
            const auto sim = bs_cosine ? Similarity::Cosine : Similarity::InnerProduct;
            SemanticIndex index = bs_ivf ? SemanticIndex(build_ivf(table, bs_k, bs_seed, sim, bs_iters))
                                         : SemanticIndex(build_exact(table, sim));
            save_index(index, bs_out);
            out << (bs_ivf ? "ivf" : "exact") << "\t" << index_size(index) << "\n";
        };
    });

    // build-lexical-index
    auto* bl = app.add_subcommand("build-lexical-index", "Build a BM25 inverted index over titles");
    std::string bl_docs, bl_out;
    Bm25Params bl_params;
    bl->add_option("--docs", bl_docs, "Documents TSV")->required();
    bl->add_option("--out", bl_out, "Index file")->required();
    bl->add_option("--k1", bl_params.k1, "BM25 k1")->capture_default_str();
    bl->add_option("--b", bl_params.b, "BM25 b")->capture_default_str();
    bl->callback([&] {
        action = [&] {
            const auto index = build_lexical(load_documents(bl_docs), bl_params);
            save_lexical(index, bl_out);
            out << "documents\t" << index.doc_count() << "\tterms\t" << index.terms.size() << "\n";
        };
    });

    // search
    auto* se = app.add_subcommand("search", "Query the indexes; prints rank, doc_id, source, score");
    std::string se_index, se_model, se_query, se_lexical, se_docs, se_mode = "ENCODER_DOT";
    std::size_t se_k = 20, se_nprobe = 0, se_k_semantic = 20, se_k_lexical = 300;
    se->add_option("--index,--semantic-index", se_index, "Semantic index file")->required();
    se->add_option("--model", se_model, "Model file")->required();
    se->add_option("--query", se_query, "Query text")->required();
    se->add_option("--k", se_k, "Results to print")->capture_default_str();
    se->add_option("--nprobe", se_nprobe, "IVF probes (0 = k_c/4)")->capture_default_str();
    se->add_option("--lexical-index", se_lexical, "Also retrieve from this BM25 index");
    se->add_option("--docs", se_docs, "Documents TSV (required with --lexical-index)");
    se->add_option("--k-semantic", se_k_semantic, "Semantic candidates in hybrid mode")->capture_default_str();
    se->add_option("--k-lexical", se_k_lexical, "Lexical candidates in hybrid mode")->capture_default_str();
    se->add_option("--score-mode", se_mode, "ENCODER_DOT, BM25_ONLY or INTERLEAVE")->capture_default_str();
    se->callback([&] {
        action = [&] {
            auto model = std::make_shared<const EncoderModel>(load_model(se_model));
            auto index = std::make_shared<const SemanticIndex>(load_index(se_index));
            std::shared_ptr<const DocumentStore> docs;
            if (!se_docs.empty()) docs = shared_docs(se_docs);
            std::shared_ptr<const InvertedIndex> lexical;
            if (!se_lexical.empty()) lexical = std::make_shared<const InvertedIndex>(load_lexical(se_lexical));
            const SearchEngine engine(docs, model, index, lexical);
            out << "rank\tdoc_id\tsource\tscore\n";
            out.precision(6);
            if (!lexical) {
                const auto hits = engine.semantic_hits(engine.embed_query(se_query), se_k, se_nprobe);
                for (std::size_t i = 0; i < hits.size(); ++i)
                    out << i + 1 << '\t' << hits[i].doc_id << "\tSEMANTIC\t" << std::fixed << hits[i].score << '\n';
                return;
            }
            HybridConfig cfg;
            cfg.k_semantic = se_k_semantic;
            cfg.k_lexical = se_k_lexical;
            cfg.nprobe = se_nprobe;
            cfg.final_k = se_k;
            cfg.score_mode = parse_score_mode(se_mode);
            const auto cands = hybrid_search(se_query, engine, cfg);
            for (std::size_t i = 0; i < cands.size(); ++i)
                out << i + 1 << '\t' << cands[i].doc_id << '\t' << to_string(cands[i].source) << '\t' << std::fixed
                    << cands[i].final_score << '\n';
        };
    });

    // evaluate
    auto* ev = app.add_subcommand("evaluate", "Recall of the retrieval arms or NDCG of the ranking");
    std::string ev_mode, ev_judgments, ev_docs, ev_model, ev_semantic, ev_lexical, ev_out;
    RetrievalEvalConfig ev_cfg;
    std::vector<std::size_t> ev_ns{1, 3, 5};
    bool ev_minus_one = false;
    ev->add_option("--mode", ev_mode, "recall or ndcg")->required()->check(CLI::IsMember({"recall", "ndcg"}));
    ev->add_option("--judgments", ev_judgments, "Test judgments TSV")->required();
    ev->add_option("--docs", ev_docs, "Documents TSV")->required();
    ev->add_option("--model", ev_model, "Model file")->required();
    ev->add_option("--semantic-index", ev_semantic, "Semantic index (recall mode)");
    ev->add_option("--lexical-index", ev_lexical, "Lexical index (recall mode)");
    ev->add_option("--out", ev_out, "Report TSV");
    ev->add_option("--k-semantic", ev_cfg.k_semantic, "Semantic top-k")->capture_default_str();
    ev->add_option("--k-lexical", ev_cfg.k_lexical, "Lexical top-k")->capture_default_str();
    ev->add_option("--nprobe", ev_cfg.nprobe, "IVF probes (0 = k_c/4)")->capture_default_str();
    ev->add_option("--ndcg-at", ev_ns, "NDCG cutoffs")->delimiter(',');
    ev->add_flag("--gain-minus-one", ev_minus_one, "Use 2^label - 1 gains");
    ev->callback([&] {
        action = [&] {
            auto docs = shared_docs(ev_docs);
            const auto test = load_judgments(ev_judgments, docs);
            auto model = std::make_shared<const EncoderModel>(load_model(ev_model));
            const auto path = ev_out.empty() ? std::filesystem::path{} : std::filesystem::path(ev_out);
            if (ev_mode == "ndcg") {
                const auto gain = ev_minus_one ? Gain::ExponentialMinusOne : Gain::Exponential;
                const NdcgRow row =
                    evaluate_ranking(test, *model, ev_ns, std::filesystem::path(ev_model).stem().string(), gain);
                if (!path.empty()) write_ndcg_report({&row, 1}, path);
                for (const auto& [n, v] : row.at) out << "ndcg@" << n << '\t' << v << '\n';
                return;
            }
            if (ev_semantic.empty() || ev_lexical.empty())
                throw Error("recall mode needs --semantic-index and --lexical-index");
            auto index = std::make_shared<const SemanticIndex>(load_index(ev_semantic));
            auto lexical = std::make_shared<const InvertedIndex>(load_lexical(ev_lexical));
            const SearchEngine engine(docs, model, index, lexical);
            const auto report = evaluate_retrieval(test, engine, ev_cfg);
            if (!path.empty()) write_recall_report(report, path);
            out << "lexical\t" << report.lexical.mean_recall << "\nsemantic\t" << report.semantic.mean_recall
                << "\nhybrid\t" << report.hybrid.mean_recall << "\nskipped\t" << report.skipped << "\n";
        };
    });

    // serve
    auto* sv = app.add_subcommand("serve", "Serve POST /search over HTTP until SIGINT/SIGTERM");
    std::string sv_config;
    Overrides sv_ov;
    sv->add_option("--config", sv_config, "key=value serving config");
    sv_ov.add_all(sv, kServeKeys);
    int exit_code = 0;
    sv->callback([&] {
        action = [&] { exit_code = serve_until_signal(ServeConfig::from(sv_ov.apply(sv_config))); };
    });

    // experiment
    auto* ex = app.add_subcommand("experiment", "Run the two-stage sampling experiment and pool-layer sweep");
    std::string ex_spec, ex_out;
    ex->add_option("--spec", ex_spec, "key=value experiment spec")->required();
    ex->add_option("--out", ex_out, "Report directory")->required();
    ex->callback([&] {
        action = [&] {
            const auto spec = load_experiment_spec(ex_spec);
            const std::filesystem::path dir(ex_out);
            if (!spec.arms.empty()) {
                const auto report = run_two_stage(spec);
                write_two_stage_reports(report, dir);
                for (const auto& arm : spec.arms) {
                    out << arm;
                    for (auto n : spec.ndcg_at) out << "\tndcg@" << n << '=' << report.mean_ndcg(arm, n);
                    out << '\n';
                }
            }
            if (spec.pool_sweep) {
                std::filesystem::create_directories(dir);
                const auto rows = run_pool_layer_sweep(spec);
                write_pool_sweep(rows, dir / "pool_sweep.tsv");
                for (const auto& r : rows)
                    out << "seed " << r.seed << " pool_layer " << r.pool_layer << "\tndcg@3=" << r.ndcg_at_3 << '\n';
            }
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const auto* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
        if (e.get_exit_code() == 0) {
            out << sub->help();
            return 0;
        }
        err << "error: " << e.what() << "\n\n" << sub->help();
        return 2;
    }

    try {
        action();
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return exit_code;
}

} // namespace semret
