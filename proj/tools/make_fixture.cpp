// Generates the bundled offline fixture: a synthetic mini-corpus of scientific
// abstracts, queries, graded qrels, a replay cache holding extraction and
// reranking responses, and the experiment config.
//
// The first query carries a planted case: its relevant paper uses vocabulary
// the lexical retriever under-weights, so short term-heavy papers ("stuffers")
// push it to first-stage rank 92. Stuffers are added until that rank is hit.
//
//   make_fixture <out_dir>

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <json.hpp>

#include "corank/commands.hpp"
#include "corank/config.hpp"
#include "corank/corpus.hpp"
#include "corank/error.hpp"
#include "corank/eval.hpp"
#include "corank/fileio.hpp"
#include "corank/llm_backend.hpp"
#include "corank/prompts.hpp"
#include "corank/retrieval.hpp"
#include "corank/text.hpp"
#include "corank/tokens.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::size_t kPlantedRank = 92;
constexpr const char* kModel = "fixture-llm";

struct Rng {
    std::mt19937_64 engine{20240917};

    std::size_t below(std::size_t n) { return static_cast<std::size_t>(engine() % n); }

    template <class T>
    const T& pick(const std::vector<T>& v)
    {
        return v[below(v.size())];
    }

    template <class T>
    std::vector<T> sample(std::vector<T> v, std::size_t k)
    {
        k = std::min(k, v.size());
        for (std::size_t i = 0; i < k; ++i) {
            std::swap(v[i], v[i + below(v.size() - i)]);
        }
        v.resize(k);
        return v;
    }
};

std::string cap(std::string s)
{
    if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') {
        s[0] = static_cast<char>(s[0] - 'a' + 'A');
    }
    return s;
}

std::string title_case(const std::string& s)
{
    std::string out;
    bool start = true;
    for (char c : s) {
        out.push_back(start && c >= 'a' && c <= 'z' ? static_cast<char>(c - 'a' + 'A') : c);
        start = c == ' ' || c == '-';
    }
    return out;
}

struct Domain {
    std::string l1;
    std::vector<std::string> l2s;
    std::vector<std::string> tasks;
    std::vector<std::string> methods;
    std::vector<std::string> datasets;
    std::vector<std::string> terms;
};

struct Paper {
    std::string id;
    std::string title;
    std::string text;
    std::array<std::string, 3> category;
    std::vector<std::string> sections;
    std::vector<std::string> keywords;
    std::vector<std::string> queries;
    int style = 0;  // response formatting variant
};

struct Topic {
    std::string qid;
    std::string query;
    Domain domain;
    // the paper the query asks for
    std::string target_method;
    std::string target_task;
    std::vector<std::string> target_terms;
    std::string target_extra;  // sentence echoing the information need
};

const std::vector<std::string> kGenericKeywords{
    "benchmark evaluation", "ablation study", "scalability", "generalization", "robustness",
    "computational efficiency", "open-source release", "empirical analysis", "baseline comparison",
    "error analysis", "reproducibility", "hyperparameter sensitivity", "transfer learning",
    "representation learning", "large-scale experiments", "statistical significance", "qualitative analysis",
    "failure cases", "model interpretability", "training stability", "inference latency", "sample efficiency",
    "evaluation protocol", "data quality", "annotation cost", "domain shift"};

const std::vector<std::string> kAdjectives{"Scalable",     "Robust",         "Efficient",       "Adaptive",
                                           "Hierarchical", "Contrastive",    "Lightweight",     "Interpretable",
                                           "Self-Supervised", "Multi-Scale", "Uncertainty-Aware", "Modular"};

std::vector<std::string> dedup(std::vector<std::string> items)
{
    return corank::dedup_case_insensitive(std::move(items));
}

std::vector<std::string> make_sections(Rng& rng, const std::string& method, const std::string& task,
                                       const std::string& dataset, const std::vector<std::string>& terms)
{
    std::vector<std::string> pool{
        fmt::format("Background on {}", title_case(task)),
        fmt::format("{} Architecture", title_case(method)),
        fmt::format("Training with {}", title_case(terms[1])),
        fmt::format("Experiments on {}", dataset),
        fmt::format("Ablation of {}", title_case(terms[2])),
        fmt::format("Analysis of {}", title_case(terms[3])),
        "Limitations and Future Work",
        fmt::format("Related Work on {}", title_case(terms[4])),
    };
    auto picked = rng.sample(pool, 4 + rng.below(3));
    return dedup(std::move(picked));
}

std::vector<std::string> make_keywords(Rng& rng, const std::vector<std::string>& own,
                                       const std::vector<std::string>& domain_terms)
{
    std::vector<std::string> kw = own;
    for (const auto& t : rng.sample(domain_terms, domain_terms.size())) {
        kw.push_back(t);
    }
    kw = dedup(std::move(kw));
    for (const auto& g : rng.sample(kGenericKeywords, kGenericKeywords.size())) {
        if (kw.size() >= 34) {
            break;
        }
        kw.push_back(g);
    }
    return dedup(std::move(kw));
}

std::vector<std::string> make_queries(const std::string& method, const std::string& task, const std::string& dataset,
                                      const std::vector<std::string>& terms, const std::string& field)
{
    std::vector<std::string> q{
        fmt::format("How does {} handle {}?", method, task),
        fmt::format("{} for {}", cap(method), task),
        fmt::format("Benchmarks for {} on {}", task, dataset),
        fmt::format("What are the benefits of {} in {}?", terms[0], field),
    };
    const std::vector<std::string> patterns{"Which approaches use {} for " + task + "?", "Improving " + task + " with {}",
                                            "Role of {} in " + task, "Recent progress on {}",
                                            "Limitations of {} in practice"};
    for (std::size_t i = 0; q.size() < 20; ++i) {
        const auto& term = terms[i % terms.size()];
        q.push_back(fmt::vformat(patterns[i % patterns.size()], fmt::make_format_args(term)));
    }
    return dedup(std::move(q));
}

Paper generic_paper(Rng& rng, const Domain& d, const std::string& method, const std::string& task,
                    std::vector<std::string> terms, const std::string& extra = {})
{
    const auto dataset = rng.pick(d.datasets);
    const auto l2 = rng.pick(d.l2s);
    const auto adj = rng.pick(kAdjectives);
    Paper p;
    p.title = fmt::format("{} {} for {}", adj, title_case(method), title_case(task));
    std::vector<std::string> body{
        fmt::format("This paper studies {}, a problem that is central to {}.", task, corank::to_lower(l2)),
        fmt::format("Existing approaches to {} rely on {}, which limits {} in realistic settings.", task, terms[1],
                    terms[2]),
        fmt::format("We propose {}, an approach that combines {} with {}.", method, terms[0], terms[3]),
        fmt::format("The model is trained on {} and evaluated against strong baselines from the literature.",
                    dataset),
        fmt::format("Experiments show that the method improves accuracy and {} while reducing the cost of {}.",
                    terms[4], terms[5]),
        fmt::format("An ablation study isolates the contribution of {} and of the training schedule.", terms[6]),
        fmt::format("We further discuss how {} can be extended to related settings in {}.", terms[7],
                    corank::to_lower(d.l1)),
        fmt::format("The results suggest that {} is a key factor for reliable {}.", terms[2], task),
    };
    if (!extra.empty()) {
        body.insert(body.begin() + 3, extra);
    }
    body.push_back(fmt::format("Code and data are released to support future work on {}.", terms[3]));
    p.text = fmt::format("{}", fmt::join(body, " "));
    p.category = {d.l1, l2, fmt::format("{} {} for {} with {}", adj, title_case(method), title_case(task),
                                        title_case(terms[0]))};
    p.sections = make_sections(rng, method, task, dataset, terms);
    std::vector<std::string> own{method, task, dataset};
    own.insert(own.end(), terms.begin(), terms.begin() + 8);
    p.keywords = make_keywords(rng, own, d.terms);
    p.queries = make_queries(method, task, dataset, terms, corank::to_lower(l2));
    p.style = static_cast<int>(rng.below(3));
    return p;
}

std::vector<Topic> topics()
{
    std::vector<Topic> t;
    t.push_back(Topic{
        "q01",
        "Which paper introduces a conditional variational autoencoder approach for controllable multi-attribute text "
        "generation that is used for data augmentation?",
        {"Natural Language Processing (NLP)",
         {"Text Generation", "Controllable Generation", "Language Modeling"},
         {"controllable text generation", "style transfer", "story generation", "dialogue response generation"},
         {"plug-and-play decoding", "prefix tuning", "discriminator-guided decoding", "constrained beam search",
          "reward-guided sampling"},
         {"Yelp Reviews", "ROCStories", "PersonaChat", "WritingPrompts"},
         {"attribute classifiers", "sentiment control", "topic control", "toxicity mitigation", "lexical constraints",
          "fluency", "diversity metrics", "human evaluation", "language model fine-tuning", "reward models",
          "decoding strategies", "latent space steering", "paraphrase generation", "style classifiers"}},
        "",
        "",
        {},
        ""});
    t.push_back(Topic{
        "q02",
        "Which paper uses an equivariant message passing graph neural network to predict molecular properties from 3D "
        "conformers?",
        {"Computational Chemistry",
         {"Molecular Machine Learning", "Drug Discovery", "Quantum Chemistry"},
         {"molecular property prediction", "reaction yield prediction", "binding affinity estimation",
          "toxicity prediction"},
         {"graph attention network", "message passing neural network", "graph transformer", "fingerprint ensemble"},
         {"QM9", "MoleculeNet", "PCQM4M", "ZINC"},
         {"3D conformers", "rotational equivariance", "atom embeddings", "bond features", "molecular graphs",
          "quantum properties", "pretraining on unlabeled molecules", "scaffold splits", "uncertainty estimation",
          "virtual screening", "geometric deep learning", "distance encodings", "energy prediction",
          "force fields"}},
        "equivariant message passing graph neural network",
        "molecular property prediction",
        {"3D conformers", "rotational equivariance", "message passing", "interatomic distances", "quantum properties",
         "molecular graphs", "energy prediction", "atom embeddings"},
        "The network operates directly on 3D conformers and uses equivariant message passing to predict molecular "
        "properties."});
    t.push_back(Topic{
        "q03",
        "Is there a retrieval-augmented question answering model that reads long scientific documents and cites the "
        "evidence passages it uses?",
        {"Information Retrieval",
         {"Question Answering", "Retrieval-Augmented Generation", "Document Understanding"},
         {"open-domain question answering", "long document summarization", "multi-hop reasoning",
          "claim verification"},
         {"dense passage retriever", "fusion-in-decoder reader", "sparse lexical retriever", "cross-encoder reranker"},
         {"Natural Questions", "QASPER", "HotpotQA", "SciFact"},
         {"evidence passages", "citation generation", "answer faithfulness", "long context", "passage retrieval",
          "reader models", "hallucination", "scientific documents", "attribution", "chunking strategies",
          "knowledge grounding", "multi-document reasoning", "answer extraction", "retrieval latency"}},
        "retrieval-augmented reader with evidence citation",
        "question answering over long scientific documents",
        {"evidence passages", "citation generation", "long context", "scientific documents", "answer faithfulness",
         "passage retrieval", "attribution", "hallucination"},
        "The retrieval-augmented model reads long scientific documents and cites the evidence passages that support "
        "each answer."});
    t.push_back(Topic{
        "q04",
        "Which study applies attention-based deep learning to predict protein structure from multiple sequence "
        "alignments?",
        {"Computational Biology",
         {"Protein Structure", "Genomics", "Structural Bioinformatics"},
         {"protein structure prediction", "protein function annotation", "variant effect prediction",
          "protein design"},
         {"evolutionary scale language model", "contact map predictor", "geometric vector perceptron",
          "diffusion-based backbone generator"},
         {"CASP14", "PDB", "UniRef50", "CATH"},
         {"multiple sequence alignments", "attention mechanisms", "residue contacts", "coevolution signals",
          "backbone geometry", "template search", "structure refinement", "confidence scores", "amino acid embeddings",
          "folding dynamics", "side chain packing", "homology modeling", "structural alignment", "protein complexes"}},
        "attention-based deep learning model",
        "protein structure prediction",
        {"multiple sequence alignments", "attention mechanisms", "residue contacts", "coevolution signals",
         "backbone geometry", "confidence scores", "structure refinement", "amino acid embeddings"},
        "The attention-based deep learning model reads multiple sequence alignments to predict protein structure."});
    t.push_back(Topic{
        "q05",
        "Which paper learns robot manipulation skills from human demonstrations with offline reinforcement learning?",
        {"Robotics",
         {"Robot Learning", "Manipulation", "Imitation Learning"},
         {"robot manipulation", "legged locomotion", "autonomous navigation", "grasp planning"},
         {"behavior cloning policy", "model-based planner", "soft actor-critic agent", "diffusion policy"},
         {"RoboSuite", "D4RL", "MetaWorld", "RLBench"},
         {"human demonstrations", "offline reinforcement learning", "reward shaping", "sim-to-real transfer",
          "policy learning", "visual observations", "contact-rich tasks", "dexterous hands", "task generalization",
          "teleoperation data", "action chunking", "safety constraints", "trajectory optimization",
          "goal conditioning"}},
        "offline reinforcement learning from human demonstrations",
        "robot manipulation",
        {"human demonstrations", "offline reinforcement learning", "manipulation skills", "policy learning",
         "contact-rich tasks", "teleoperation data", "visual observations", "task generalization"},
        "The robot learns manipulation skills from human demonstrations using offline reinforcement learning."});
    t.push_back(Topic{
        "q06",
        "Which work combines federated learning with differential privacy to train medical image segmentation models "
        "across hospitals?",
        {"Machine Learning",
         {"Privacy-Preserving Learning", "Medical Imaging", "Distributed Optimization"},
         {"medical image segmentation", "disease classification", "clinical risk prediction", "lesion detection"},
         {"U-Net", "secure aggregation protocol", "personalized federated averaging", "vision transformer"},
         {"BraTS", "CheXpert", "ISIC", "MIMIC-CXR"},
         {"federated learning", "differential privacy", "client heterogeneity", "privacy budget",
          "communication efficiency", "hospitals", "gradient clipping", "membership inference", "non-IID data",
          "model personalization", "secure aggregation", "patient data", "noise calibration", "fairness"}},
        "federated learning with differential privacy",
        "medical image segmentation",
        {"federated learning", "differential privacy", "hospitals", "privacy budget", "client heterogeneity",
         "gradient clipping", "non-IID data", "patient data"},
        "Hospitals train segmentation models with federated learning while differential privacy bounds the leakage."});
    t.push_back(Topic{
        "q07",
        "Which paper improves neural machine translation for low-resource languages with iterative back-translation?",
        {"Natural Language Processing (NLP)",
         {"Machine Translation", "Multilingual NLP", "Low-Resource Languages"},
         {"neural machine translation", "cross-lingual transfer", "speech translation", "code-switching"},
         {"multilingual transformer", "denoising autoencoder pretraining", "pivot-based translation",
          "adapter fine-tuning"},
         {"FLORES-200", "WMT", "OPUS", "IWSLT"},
         {"back-translation", "low-resource languages", "monolingual corpora", "synthetic parallel data",
          "vocabulary sharing", "subword segmentation", "BLEU", "domain adaptation", "language families",
          "tagged back-translation", "data filtering", "zero-shot translation", "morphologically rich languages",
          "quality estimation"}},
        "iterative back-translation",
        "neural machine translation for low-resource languages",
        {"back-translation", "low-resource languages", "monolingual corpora", "synthetic parallel data",
         "data filtering", "subword segmentation", "BLEU", "tagged back-translation"},
        "Iterative back-translation turns monolingual corpora into synthetic parallel data for low-resource "
        "languages."});
    t.push_back(Topic{
        "q08",
        "Can you find a paper that uses diffusion models for statistical downscaling of climate projections?",
        {"Earth Science",
         {"Climate Modeling", "Weather Forecasting", "Geospatial Machine Learning"},
         {"climate downscaling", "precipitation nowcasting", "extreme event detection", "sea ice forecasting"},
         {"score-based diffusion model", "convolutional super-resolution network", "Fourier neural operator",
          "generative adversarial network"},
         {"ERA5", "CMIP6", "WeatherBench", "PRISM"},
         {"diffusion models", "statistical downscaling", "climate projections", "super-resolution",
          "precipitation extremes", "spatial resolution", "bias correction", "ensemble forecasts", "uncertainty",
          "regional climate", "physical consistency", "reanalysis data", "temperature fields", "spectral analysis"}},
        "score-based diffusion model",
        "statistical downscaling of climate projections",
        {"diffusion models", "statistical downscaling", "climate projections", "super-resolution",
         "precipitation extremes", "bias correction", "regional climate", "uncertainty"},
        "The diffusion models generate fine-grained fields for statistical downscaling of climate projections."});
    t.push_back(Topic{
        "q09",
        "Which paper trains large language models for code generation using unit test execution feedback?",
        {"Software Engineering",
         {"Program Synthesis", "Code Intelligence", "Software Testing"},
         {"code generation", "program repair", "test generation", "code summarization"},
         {"code language model", "execution-guided decoder", "retrieval-augmented coder", "self-debugging agent"},
         {"HumanEval", "MBPP", "APPS", "CodeContests"},
         {"unit test execution", "execution feedback", "large language models", "functional correctness",
          "pass@k", "reinforcement learning from feedback", "compiler errors", "program semantics",
          "sandboxed execution", "test coverage", "code ranking", "instruction tuning", "bug localization",
          "static analysis"}},
        "large language models trained with execution feedback",
        "code generation",
        {"unit test execution", "execution feedback", "large language models", "functional correctness", "pass@k",
         "reinforcement learning from feedback", "sandboxed execution", "compiler errors"},
        "Large language models for code generation are trained with feedback from unit test execution."});
    t.push_back(Topic{
        "q10",
        "Is there a study of sparse mixture-of-experts layers that reduce the training cost of large transformers?",
        {"Machine Learning Systems",
         {"Efficient Deep Learning", "Distributed Training", "Model Compression"},
         {"efficient transformer training", "model compression", "long-sequence modeling", "inference serving"},
         {"sparse mixture-of-experts", "low-rank adaptation", "quantization-aware training", "pipeline parallelism"},
         {"C4", "The Pile", "GLUE", "SuperGLUE"},
         {"mixture-of-experts layers", "expert routing", "load balancing", "training cost", "large transformers",
          "conditional computation", "sparsity", "throughput", "memory footprint", "expert capacity",
          "scaling laws", "token dropping", "communication overhead", "model parallelism"}},
        "sparse mixture-of-experts layers",
        "reducing the training cost of large transformers",
        {"mixture-of-experts layers", "expert routing", "load balancing", "training cost", "large transformers",
         "conditional computation", "sparsity", "throughput"},
        "Sparse mixture-of-experts layers reduce the training cost of large transformers through conditional "
        "computation."});
    return t;
}

std::vector<Domain> filler_domains()
{
    return {
        {"Astronomy",
         {"Exoplanets", "Time-Domain Astronomy"},
         {"exoplanet detection", "transient classification"},
         {"light curve classifier", "Gaussian process model", "convolutional detector"},
         {"Kepler", "TESS", "ZTF"},
         {"light curves", "transit signals", "stellar variability", "photometric noise", "false positives",
          "survey pipelines", "periodograms", "follow-up observations", "planet occurrence"}},
        {"Ecology",
         {"Biodiversity", "Species Distribution"},
         {"species distribution modeling", "camera trap analysis"},
         {"occupancy model", "random forest ensemble", "spatial point process"},
         {"GBIF", "Snapshot Serengeti", "eBird"},
         {"habitat suitability", "presence-only data", "climate covariates", "sampling bias", "land cover",
          "population trends", "detection probability", "conservation planning", "citizen science"}},
        {"Materials Science",
         {"Battery Materials", "Computational Materials"},
         {"electrolyte screening", "crystal structure prediction"},
         {"density functional theory workflow", "crystal graph network", "active learning loop"},
         {"Materials Project", "OQMD", "JARVIS"},
         {"ionic conductivity", "solid electrolytes", "formation energy", "phase stability", "high-throughput screening",
          "lithium diffusion", "interface reactions", "synthesis planning", "defect chemistry"}},
        {"Economics",
         {"Labor Economics", "Econometrics"},
         {"labor market forecasting", "causal effect estimation"},
         {"difference-in-differences design", "structural model", "synthetic control method"},
         {"CPS", "PSID", "LinkedIn Economic Graph"},
         {"wage dynamics", "job mobility", "minimum wage", "panel data", "instrumental variables", "policy evaluation",
          "unemployment spells", "regional labor markets", "automation exposure"}},
        {"Neuroscience",
         {"Neural Recording", "Computational Neuroscience"},
         {"spike sorting", "neural decoding"},
         {"template matching pipeline", "latent dynamical system", "recurrent decoder"},
         {"Neuropixels", "Allen Brain Observatory", "DANDI"},
         {"extracellular recordings", "single units", "population dynamics", "calcium imaging", "motor cortex",
          "drift correction", "waveform features", "brain-computer interfaces", "behavioral variables"}},
        {"Education",
         {"Learning Analytics", "Intelligent Tutoring"},
         {"knowledge tracing", "automated essay scoring"},
         {"Bayesian knowledge tracing", "sequence model", "rubric-based scorer"},
         {"ASSISTments", "EdNet", "ASAP"},
         {"student modeling", "learning trajectories", "skill mastery", "feedback generation", "dropout prediction",
          "item response theory", "curriculum design", "engagement signals", "fairness across groups"}},
        {"Epidemiology",
         {"Infectious Disease Modeling", "Public Health"},
         {"infection forecasting", "outbreak detection"},
         {"compartmental model", "mobility-informed forecaster", "hierarchical Bayesian model"},
         {"CDC FluSight", "Johns Hopkins COVID-19 data", "WHO FluNet"},
         {"reproduction number", "hospital admissions", "mobility data", "wastewater surveillance", "nowcasting",
          "intervention effects", "age structure", "reporting delays", "ensemble forecasting"}},
    };
}

// The planted paper for q01: long, phrased with abbreviations the lexical
// retriever rewards little, but its extracted features state the topic plainly.
Paper planted_paper()
{
    Paper p;
    p.title = "Conditioned Latent Variable Generation of Text under Multiple Attributes";
    p.text =
        "This paper introduces CLAVE, a conditional variational autoencoder approach that is used to write new "
        "training sentences whose attributes can be set one at a time or jointly. Which attributes a sentence carries, "
        "such as its sentiment, tense, formality or person, is decided by a small set of codes that the decoder "
        "reads at every step. A single discriminator judges all codes at once, so the cost of the model stays flat "
        "as more multi-attribute combinations are requested, and a context-aware reconstruction term keeps the "
        "decoded sentences fluent. We pair this with a cyclical word dropout routine that stops the decoder from "
        "ignoring the latent code. Human judges and automatic probes agree that the outputs are diverse, natural and "
        "faithful to the requested codes, which makes the text generation controllable in a way earlier latent "
        "models were not. The main use we study is data augmentation: when the generated sentences are added to a "
        "small labelled set, a downstream classifier gains accuracy that is often close to what the same number of "
        "extra human-written examples would give. We also report what happens when codes conflict, when the "
        "vocabulary drifts away from the training domain, and when the latent space is probed for interpolation. "
        "An ablation isolates the discriminator, the reconstruction term and the dropout schedule, and shows each is "
        "needed. We close with a discussion of failure modes such as repeated phrases in long outputs, the limits of "
        "attribute codes for rare styles, and how the same recipe could cover dialogue or summarization. The "
        "released code covers training, sampling and the evaluation probes, and the generated corpora are shared so "
        "that others can measure their own augmentation pipelines against ours.";
    p.category = {"Natural Language Processing (NLP)", "Text Generation and Data Augmentation",
                  "Conditional Variational Autoencoder Framework for Controllable Multi-Attribute Text Generation and "
                  "Data Augmentation"};
    p.sections = {"Conditional Latent Codes for Multi-Attribute Text Generation",
                  "Single Discriminator for Scalable Attribute Control",
                  "Context-Aware Reconstruction and Cyclical Word Dropout",
                  "Data Augmentation for Downstream Classification",
                  "Ablation and Failure Analysis"};
    p.keywords = {"Conditional Variational Autoencoder", "Multi-Attribute Control", "Text Generation",
                  "Data Augmentation", "Semantic Attributes", "Syntactic Attributes", "Controllable Generation",
                  "Latent Codes", "Single Discriminator", "Adversarial Learning", "Cyclical Word Dropout",
                  "Context-Aware Loss", "Sentence Generation", "Downstream Classification", "Low-Resource Training",
                  "Sentiment Control", "Tense Control", "Formality Control", "Latent Space Interpolation",
                  "Human Evaluation", "Diversity", "Fluency", "Attribute Accuracy", "Scalability",
                  "Synthetic Training Data", "Ablation Study", "Natural Language Generation", "Style Codes",
                  "Text Classification", "Generative Models", "Open-Source Release"};
    p.queries = {"conditional variational autoencoder for text generation",
                 "controlling multiple attributes when generating sentences",
                 "data augmentation with generated sentences",
                 "multi-attribute controllable text generation",
                 "single discriminator for many attributes",
                 "cyclical word dropout in VAEs",
                 "synthetic data for low-resource text classification",
                 "latent codes for sentiment and tense control",
                 "how to keep a VAE decoder from ignoring the latent code",
                 "scalable attribute control in language generation",
                 "human evaluation of controllable generation",
                 "augmenting small labelled datasets with generated text",
                 "context-aware reconstruction loss for text VAEs",
                 "formality and person control in generated sentences",
                 "conditional generation for data augmentation in NLP",
                 "comparing synthetic and real training examples",
                 "latent space interpolation of sentences",
                 "failure modes of attribute-conditioned generation",
                 "diversity and fluency of VAE text generation",
                 "which papers use VAEs to augment classification data"};
    p.style = 1;
    return p;
}

const std::vector<std::string> kStufferAreas{
    "molecule design",        "speech synthesis",          "sensor anomaly detection", "medical image synthesis",
    "music generation",       "trajectory forecasting",    "recommender systems",      "protein sequence design",
    "tabular data synthesis", "time series imputation",    "3D shape generation",      "face image editing",
    "network intrusion data", "handwriting synthesis",     "traffic simulation",       "seismic waveform modeling",
    "retail demand scenarios", "satellite image generation", "crop yield scenarios",   "fraud detection data"};

// Short, term-heavy papers on conditional VAEs outside NLP. Their features name
// their own field, so the compact representation does not echo the query.
Paper stuffer_paper(Rng& rng, std::size_t n)
{
    const auto& area = kStufferAreas[n % kStufferAreas.size()];
    const auto variant = n / kStufferAreas.size();
    const std::vector<std::string> tails{"with attribute codes", "for data augmentation", "with controllable latents",
                                         "for multi-attribute conditioning", "for generation at scale"};
    Paper p;
    p.title = fmt::format("Conditional Variational Autoencoder {} in {}", tails[variant % tails.size()],
                          title_case(area));
    p.text = fmt::format(
        "This paper introduces a conditional variational autoencoder approach for {0}, which is used for data "
        "augmentation. The conditional variational autoencoder makes generation controllable: attribute labels, "
        "including multi-attribute combinations, condition the decoder, and short text descriptions of each attribute "
        "are used as side information. Data augmentation with the conditional variational autoencoder improves the "
        "downstream models for {0}, and the generation stays stable as attribute labels are added.",
        area);
    const std::string field = title_case(area);
    p.category = {"Applied Machine Learning", fmt::format("Generative Models in {}", field),
                  fmt::format("Latent Variable Modeling of {} Scenarios", field)};
    p.sections = {fmt::format("Latent Variable Model for {}", field), "Conditioning Labels",
                  fmt::format("Evaluation on {} Benchmarks", field), "Limitations"};
    std::vector<std::string> kw{field,
                                fmt::format("{} benchmarks", area),
                                "latent variable models",
                                "evidence lower bound",
                                "posterior collapse",
                                "KL annealing",
                                "decoder capacity",
                                "encoder networks",
                                "reparameterization trick",
                                "sample quality",
                                "domain experts",
                                "simulation studies"};
    for (const auto& g : rng.sample(kGenericKeywords, kGenericKeywords.size())) {
        if (kw.size() >= 32) {
            break;
        }
        kw.push_back(g);
    }
    p.keywords = dedup(std::move(kw));
    std::vector<std::string> q;
    for (const auto& k : p.keywords) {
        if (q.size() == 20) {
            break;
        }
        q.push_back(fmt::format("{} in {}", k, area));
    }
    p.queries = dedup(std::move(q));
    p.style = static_cast<int>(n % 3);
    return p;
}

// ---- extraction responses, formatted the way chat models tend to answer ----

std::string category_response(const Paper& p)
{
    const auto& c = p.category;
    switch (p.style) {
    case 0: return fmt::format("{} -> {} -> {}", c[0], c[1], c[2]);
    case 1: return fmt::format("Category: {} -> {} -> {}", c[0], c[1], c[2]);
    default:
        return fmt::format("1. Broad category: {}\n2. Subcategory: {}\n3. Topic description: {}", c[0], c[1], c[2]);
    }
}

std::string list_response(const std::vector<std::string>& items, int style, const std::string& preamble)
{
    std::string out = preamble.empty() ? "" : preamble + "\n\n";
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (style == 1) {
            out += fmt::format("- {}\n", items[i]);
        } else {
            out += fmt::format("{}. {}\n", i + 1, items[i]);
        }
    }
    return out;
}

std::string keywords_response(const Paper& p)
{
    if (p.style == 2) {
        return list_response(p.keywords, 1, "Here are the key concepts:");
    }
    return fmt::format("Keywords: {}", fmt::join(p.keywords, ", "));
}

void write_jsonl(const fs::path& path, const std::vector<json>& records)
{
    std::string out;
    for (const auto& r : records) {
        out += r.dump() + "\n";
    }
    corank::write_file_atomic(path, out);
}

std::size_t rank_of(const corank::CandidateList& list, const std::string& doc)
{
    for (std::size_t i = 0; i < list.entries.size(); ++i) {
        if (list.entries[i].doc_id == doc) {
            return i + 1;
        }
    }
    return 0;
}

std::size_t rank_in(const std::vector<std::string>& ranking, const std::string& doc)
{
    auto it = std::find(ranking.begin(), ranking.end(), doc);
    return it == ranking.end() ? 0 : static_cast<std::size_t>(it - ranking.begin()) + 1;
}

[[noreturn]] void fail(const std::string& msg)
{
    throw corank::Error("fixture generation: " + msg);
}

int run(const fs::path& out_dir)
{
    Rng rng;
    std::vector<std::string> id_pool;
    for (int i = 1; i <= 600; ++i) {
        id_pool.push_back(fmt::format("d{:04}", i));
    }
    id_pool = rng.sample(id_pool, id_pool.size());
    std::size_t next_id = 0;
    auto take_id = [&] { return id_pool.at(next_id++); };

    std::vector<Paper> papers;
    std::vector<corank::Query> queries;
    corank::Qrels qrels;
    std::string planted_id;

    for (const auto& topic : topics()) {
        queries.push_back({topic.qid, topic.query});
        const auto& d = topic.domain;
        if (topic.qid == "q01") {
            auto p = planted_paper();
            p.id = take_id();
            planted_id = p.id;
            qrels.set(topic.qid, p.id, 2);
            papers.push_back(std::move(p));
        } else {
            auto terms = topic.target_terms;
            auto p = generic_paper(rng, d, topic.target_method, topic.target_task, terms, topic.target_extra);
            p.title = fmt::format("{} for {}", title_case(topic.target_method), title_case(topic.target_task));
            p.id = take_id();
            qrels.set(topic.qid, p.id, 2);
            papers.push_back(std::move(p));
        }
        for (int i = 0; i < 8; ++i) {
            const auto& method = rng.pick(d.methods);
            const auto task = i == 0 && !topic.target_task.empty() ? topic.target_task : rng.pick(d.tasks);
            auto p = generic_paper(rng, d, method, task, rng.sample(d.terms, 8));
            p.id = take_id();
            if (i == 0) {
                qrels.set(topic.qid, p.id, 1);
            }
            papers.push_back(std::move(p));
        }
    }
    for (const auto& d : filler_domains()) {
        for (int i = 0; i < 10; ++i) {
            auto p = generic_paper(rng, d, rng.pick(d.methods), rng.pick(d.tasks), rng.sample(d.terms, 8));
            p.id = take_id();
            papers.push_back(std::move(p));
        }
    }

    auto build_corpus = [&] {
        corank::Corpus corpus;
        for (const auto& p : papers) {
            corpus.add(corank::Document(p.id, p.title, p.text));
        }
        return corpus;
    };
    auto planted_rank = [&] {
        const auto corpus = build_corpus();
        const auto index = corank::build_index(corpus);
        return rank_of(corank::bm25_search(index, queries.front(), 200), planted_id);
    };

    std::size_t stuffers = 0;
    for (auto rank = planted_rank(); rank != kPlantedRank; rank = planted_rank()) {
        if (rank == 0 || rank > kPlantedRank) {
            fail(fmt::format("planted paper sits at rank {} before reaching {}", rank, kPlantedRank));
        }
        auto p = stuffer_paper(rng, stuffers++);
        p.id = take_id();
        papers.push_back(std::move(p));
        if (planted_rank() <= rank) {
            const auto corpus = build_corpus();
            const auto list = corank::bm25_search(corank::build_index(corpus), queries.front(), 200);
            std::string dump;
            for (std::size_t i = 0; i < 100 && i < list.size(); ++i) {
                dump += fmt::format("{} {} {:.3f}\n", i + 1, list.entries[i].doc_id, list.entries[i].score);
            }
            fail(fmt::format("a stuffer paper did not outrank the planted paper {} (rank {})\n{}", planted_id, rank, dump));
        }
    }
    std::cout << fmt::format("{} papers ({} stuffers), planted {} at rank {}\n", papers.size(), stuffers, planted_id,
                             kPlantedRank);

    std::sort(papers.begin(), papers.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    fs::create_directories(out_dir);
    corank::write_corpus(build_corpus(), out_dir / "corpus.jsonl");
    corank::write_queries(queries, out_dir / "queries.jsonl");
    corank::write_qrels(qrels, out_dir / "qrels.txt");

    const auto cache_path = out_dir / "llm_cache.jsonl";
    fs::remove(cache_path);
    {
        corank::ResponseCache cache(cache_path);
        for (const auto& p : papers) {
            const std::array<std::pair<corank::FeatureKind, std::string>, 4> answers{{
                {corank::FeatureKind::Category, category_response(p)},
                {corank::FeatureKind::Sections,
                 list_response(p.sections, p.style == 1 ? 1 : 0, p.style == 2 ? "Suggested section headings:" : "")},
                {corank::FeatureKind::Keywords, keywords_response(p)},
                {corank::FeatureKind::PseudoQueries, list_response(p.queries, 0, "")},
            }};
            for (const auto& [kind, text] : answers) {
                corank::ChatRequest request{kModel, corank::render_extraction_prompt(kind, p.text), 1.0, 42, 4096};
                cache.insert(corank::request_digest(request),
                             corank::ChatResponse{text, static_cast<std::int64_t>(corank::count_tokens(request.prompt)),
                                                  static_cast<std::int64_t>(corank::count_tokens(text))});
            }
        }
    }

    const json config{
        {"corpus_path", "corpus.jsonl"},
        {"queries_path", "queries.jsonl"},
        {"qrels_path", "qrels.txt"},
        {"features_path", "runs/features.jsonl"},
        {"output_dir", "runs"},
        {"retriever", "bm25"},
        {"retrieve_m", 200},
        {"strategies", {"vanilla", "sliding", "corank", "corank_sliding"}},
        {"rerank",
         {{"vanilla_m", 20},
          {"sliding_total", 100},
          {"window", 20},
          {"step", 10},
          {"coarse_m", 200},
          {"fine_k", 20},
          {"form", 4},
          {"k_keywords", 5}}},
        {"backend", {{"mode", "replay"}, {"model", kModel}, {"cache_path", "llm_cache.jsonl"}, {"parallelism", 4}}},
        {"embedder", {{"kind", "hash"}, {"dim", 256}, {"seed", 42}}},
        {"price_per_million", 0.4}};
    corank::write_file_atomic(out_dir / "config.json", config.dump(2) + "\n");
    corank::write_file_atomic(out_dir / "case_study.json",
                              json{{"query_id", "q01"}, {"doc_id", planted_id}, {"first_stage_rank", kPlantedRank}}
                                      .dump(2) +
                                  "\n");

    // Record the reranking responses so replay mode covers the default config.
    auto cfg = corank::load_config(out_dir / "config.json");
    cfg.backend.mode = corank::BackendMode::Record;
    cfg.backend.parallelism = 1;
    fs::remove_all(cfg.output_dir);
    std::ostringstream log;
    if (corank::cmd_extract(cfg, log) != 0) {
        fail("extraction failed:\n" + log.str());
    }
    corank::cmd_rerank(cfg, log);
    corank::cmd_eval(cfg, {}, log);
    std::cout << log.str();

    const auto vanilla = corank::load_run(corank::run_path(cfg, "vanilla"));
    const auto co = corank::load_run(corank::run_path(cfg, "corank"));
    const auto v_rank = rank_in(vanilla.front().ranking, planted_id);
    const auto c_rank = rank_in(co.front().ranking, planted_id);
    std::cout << fmt::format("planted paper: vanilla rank {}, corank rank {}\n", v_rank, c_rank);
    if (v_rank <= 10 || c_rank == 0 || c_rank > 10) {
        fail("planted case does not separate the strategies");
    }
    const auto v_report = corank::evaluate_run(vanilla, qrels);
    const auto c_report = corank::evaluate_run(co, qrels);
    if (!(c_report.aggregate.recall10 > v_report.aggregate.recall10)) {
        fail("corank recall@10 does not exceed vanilla");
    }
    fs::remove_all(cfg.output_dir);
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    if (argc != 2) {
        std::cerr << "usage: make_fixture <out_dir>\n";
        return 2;
    }
    try {
        return run(argv[1]);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
