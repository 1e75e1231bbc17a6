#include "parsrec/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "parsrec/errors.hpp"
#include "parsrec/rng.hpp"

namespace parsrec {

namespace {

const std::vector<std::string>& surname_pool() {
    static const std::vector<std::string> pool = {
        "Acilar",   "Arslan",  "Smith",    "Johnson", "Muller",   "Garcia",  "Kowalski",
        "Novak",    "Tanaka",  "Kim",      "Chen",    "Silva",    "Costa",   "Brown",
        "Wilson",   "Taylor",  "Moore",    "Jackson", "White",    "Harris",  "Martin",
        "Lee",      "Walker",  "Hall",     "Young",   "King",     "Wright",  "Scott",
        "Green",    "Baker",   "Adams",    "Nelson",  "Carter",   "Mitchell", "Roberts",
        "Turner",   "Phillips", "Campbell", "Parker",  "Evans"};
    return pool;
}

const std::vector<std::string>& title_word_pool() {
    static const std::vector<std::string> pool = {
        "adaptive",   "collaborative", "filtering",  "methods",    "based",     "on",
        "artificial", "immune",        "networks",   "sparse",     "models",    "for",
        "reference",  "parsing",       "analysis",   "of",         "chemical",  "data",
        "learning",   "systems",       "neural",     "approaches", "to",        "structured",
        "extraction", "surveys",       "evaluation", "robust",     "signal",    "processing",
        "graph",      "algorithms",    "clustering", "inference",  "stochastic", "optimization",
        "frameworks", "semantic",      "retrieval",  "large",      "scale",     "estimation"};
    return pool;
}

const std::vector<std::string>& source_pool() {
    static const std::vector<std::string> pool = {
        "Expert Systems with Applications",
        "Journal of Chemical Information",
        "Information Processing Letters",
        "Pattern Recognition",
        "Machine Learning",
        "Artificial Intelligence Review",
        "Data Mining Review",
        "Journal of Information Science",
        "Knowledge Based Systems",
        "Computational Linguistics",
        "Journal of Applied Informatics",
        "Systems Research Letters"};
    return pool;
}

// Formatting of one author per style.
std::string author_bracket(const std::string& surname, const std::string& initials) {
    std::string s;
    for (char c : initials) {
        s += c;
        s += '.';
    }
    return s + " " + surname;  // "A.M. Acilar"
}

std::string author_spaced(const std::string& surname, const std::string& initials) {
    std::string s = surname + ",";
    for (char c : initials) {
        s += ' ';
        s += c;
        s += '.';
    }
    return s;  // "Acilar, A. M."
}

std::string author_semi(const std::string& surname, const std::string& initials) {
    return surname + " " + initials;  // "Acilar AM"
}

std::string author_dotnum(const std::string& surname, const std::string& initials) {
    std::string s = surname + " ";
    for (char c : initials) {
        s += c;
        s += '.';
    }
    return s;  // "Acilar A.M."
}

std::string join_title(const std::vector<std::string>& words) {
    std::string out;
    for (std::size_t i = 0; i < words.size(); ++i) {
        std::string w = words[i];
        if (i == 0 && !w.empty()) w[0] = static_cast<char>(std::toupper(w[0]));
        if (i > 0) out += ' ';
        out += w;
    }
    return out;
}

void add_common_truth(ParsedReference& truth, const RefTuple& t) {
    truth.add("source", t.source);
    truth.add("year", std::to_string(t.year));
    truth.add("volume", std::to_string(t.volume));
    if (t.issue >= 0) truth.add("issue", std::to_string(t.issue));
    truth.add("page", std::to_string(t.page));
}

// One formatting mutation; the ground truth stays clean, so template
// breakage shows up as extraction errors.
std::string apply_jitter(std::string s, int op) {
    const auto drop_char_at = [&](std::size_t pos) { s.erase(pos, 1); };
    switch (op) {
        case 0: {  // remove the first comma
            const auto p = s.find(',');
            if (p != std::string::npos) drop_char_at(p);
            break;
        }
        case 1: {  // remove the last comma
            const auto p = s.rfind(',');
            if (p != std::string::npos) drop_char_at(p);
            break;
        }
        case 2: {  // en dash -> ASCII hyphen (templates accept both)
            const auto p = s.find("–");
            if (p != std::string::npos) s.replace(p, std::string("–").size(), "-");
            break;
        }
        case 3: {  // double one space
            const auto p = s.find(' ');
            if (p != std::string::npos) s.insert(p, " ");
            break;
        }
        case 4: {  // remove a period (first after the leading enumeration)
            const auto p = s.find('.', 4);
            if (p != std::string::npos) drop_char_at(p);
            break;
        }
        case 5: {  // strip the first parenthesis pair
            const auto open = s.find('(');
            if (open != std::string::npos) {
                const auto close = s.find(')', open);
                if (close != std::string::npos) {
                    s.erase(close, 1);
                    s.erase(open, 1);
                }
            }
            break;
        }
        case 6: {  // remove one mid-string space
            const auto p = s.find(' ', s.size() / 2);
            if (p != std::string::npos) drop_char_at(p);
            break;
        }
        default: break;
    }
    return s;
}

}  // namespace

std::vector<SynthStyleSpec> default_styles(const NoiseKnobs& noise) {
    return {
        {"bracket", 0.30, noise}, {"apa", 0.25, noise},    {"semi", 0.20, noise},
        {"dotnum", 0.15, noise},  {"plain", 0.10, noise},
    };
}

std::pair<std::string, ParsedReference> render_reference(const std::string& style,
                                                         const RefTuple& t, int jitter_op) {
    if (t.authors.empty()) throw InvalidInput("render_reference: tuple without authors");
    std::ostringstream s;
    ParsedReference truth;
    const std::string title = join_title(t.title_words);

    if (style == "bracket") {
        // "[2] A.M. Acilar, A. Arslan, Title, Journal 36 (4) (2008) 8324–8332."
        s << '[' << t.enum_no << "] ";
        for (std::size_t i = 0; i < t.authors.size(); ++i) {
            if (i > 0) s << ", ";
            s << author_bracket(t.authors[i].first, t.authors[i].second);
        }
        s << ", " << title << ", " << t.source << ' ' << t.volume;
        if (t.issue >= 0) s << " (" << t.issue << ')';
        s << " (" << t.year << ") " << t.page << "–" << t.page_end << '.';
        truth.add("author", author_bracket(t.authors[0].first, t.authors[0].second));
    } else if (style == "apa") {
        // "Acilar, A. M., & Arslan, A. (2008). Title. Journal, 36(4), 8324-8332."
        for (std::size_t i = 0; i < t.authors.size(); ++i) {
            if (i > 0) s << (i + 1 == t.authors.size() ? ", & " : ", ");
            s << author_spaced(t.authors[i].first, t.authors[i].second);
        }
        s << " (" << t.year << "). " << title << ". " << t.source << ", " << t.volume;
        if (t.issue >= 0) s << '(' << t.issue << ')';
        s << ", " << t.page << '-' << t.page_end << '.';
        truth.add("author", author_spaced(t.authors[0].first, t.authors[0].second));
    } else if (style == "semi") {
        // "Acilar AM; Arslan A; Title; Journal; 2008; 36(4); p. 8324."
        for (std::size_t i = 0; i < t.authors.size(); ++i) {
            if (i > 0) s << "; ";
            s << author_semi(t.authors[i].first, t.authors[i].second);
        }
        s << "; " << title << "; " << t.source << "; " << t.year << "; " << t.volume;
        if (t.issue >= 0) s << '(' << t.issue << ')';
        s << "; p. " << t.page << '.';
        truth.add("author", author_semi(t.authors[0].first, t.authors[0].second));
    } else if (style == "dotnum") {
        // "2. Acilar A.M., Arslan A. Title. Journal. 2008. Vol. 36. No. 4. P. 8324–8332."
        s << t.enum_no << ". ";
        for (std::size_t i = 0; i < t.authors.size(); ++i) {
            if (i > 0) s << ", ";
            s << author_dotnum(t.authors[i].first, t.authors[i].second);
        }
        s << ' ' << title << ". " << t.source << ". " << t.year << ". Vol. " << t.volume << '.';
        if (t.issue >= 0) s << " No. " << t.issue << '.';
        s << " P. " << t.page << "–" << t.page_end << '.';
        truth.add("author", author_dotnum(t.authors[0].first, t.authors[0].second));
    } else if (style == "plain") {
        // "Acilar, A. M. & Arslan, A. Title. Journal 36, 8324–8332 (2008)."
        for (std::size_t i = 0; i < t.authors.size(); ++i) {
            if (i > 0) s << (i + 1 == t.authors.size() ? " & " : ", ");
            s << author_spaced(t.authors[i].first, t.authors[i].second);
        }
        s << ' ' << title << ". " << t.source << ' ' << t.volume << ", " << t.page << "–"
          << t.page_end << " (" << t.year << ").";
        truth.add("author", author_spaced(t.authors[0].first, t.authors[0].second));
    } else {
        throw InvalidInput("render_reference: unknown style " + style);
    }

    add_common_truth(truth, t);
    std::string raw = s.str();
    if (jitter_op >= 0) raw = apply_jitter(std::move(raw), jitter_op);
    return {std::move(raw), std::move(truth)};
}

Corpus synth(const SynthParams& params) {
    if (params.styles.size() < 2) throw InvalidInput("synth: need at least 2 styles");
    if (params.n_docs < 1) throw InvalidInput("synth: need at least 1 document");

    double weight_sum = 0.0;
    for (const auto& style : params.styles) {
        if (style.weight < 0.0) throw InvalidInput("synth: negative style weight");
        weight_sum += style.weight;
    }
    if (weight_sum <= 0.0) throw InvalidInput("synth: style weights sum to zero");

    // Exact largest-remainder allocation of dominant styles over documents,
    // then a seeded shuffle of the assignment.
    const std::size_t n = params.n_docs;
    std::vector<std::size_t> count(params.styles.size(), 0);
    std::vector<double> rem(params.styles.size(), 0.0);
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < params.styles.size(); ++i) {
        const double quota = params.styles[i].weight / weight_sum * static_cast<double>(n);
        count[i] = static_cast<std::size_t>(std::floor(quota + 1e-9));
        rem[i] = quota - static_cast<double>(count[i]);
        assigned += count[i];
    }
    std::vector<std::size_t> order(params.styles.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return rem[a] > rem[b]; });
    for (std::size_t k = 0; assigned < n; ++k, ++assigned) count[order[k % order.size()]] += 1;

    std::vector<std::size_t> dominant;
    dominant.reserve(n);
    for (std::size_t i = 0; i < params.styles.size(); ++i)
        dominant.insert(dominant.end(), count[i], i);
    std::mt19937_64 style_rng(derive_seed(params.seed, "dominant-style"));
    shuffle_pinned(dominant, style_rng);

    Corpus corpus;
    corpus.records.reserve(n * params.refs_per_doc);
    char id_buf[32];

    for (std::size_t doc = 0; doc < n; ++doc) {
        std::mt19937_64 rng(derive_seed(params.seed, "doc", doc));
        std::snprintf(id_buf, sizeof(id_buf), "d%05zu", doc);
        const std::string doc_id = id_buf;
        const std::size_t doc_style = dominant[doc];

        for (std::size_t ref = 0; ref < params.refs_per_doc; ++ref) {
            std::size_t style_index = doc_style;
            const NoiseKnobs& noise = params.styles[doc_style].noise;
            if (params.styles.size() > 1 && uniform_real(rng) < noise.style_mix) {
                // Mixed-in foreign style: uniform over the others.
                std::size_t other =
                    static_cast<std::size_t>(uniform_below(rng, params.styles.size() - 1));
                if (other >= doc_style) ++other;
                style_index = other;
            }
            const std::string& style = params.styles[style_index].name;

            RefTuple t;
            t.enum_no = static_cast<int>(ref + 1);
            const std::size_t n_authors = 1 + uniform_below(rng, 3);
            std::vector<std::size_t> picked;
            while (picked.size() < n_authors) {
                const auto idx = uniform_below(rng, surname_pool().size());
                if (std::find(picked.begin(), picked.end(), idx) == picked.end())
                    picked.push_back(idx);
            }
            for (const auto idx : picked) {
                std::string initials(1, static_cast<char>('A' + uniform_below(rng, 26)));
                if (uniform_below(rng, 2) == 1)
                    initials += static_cast<char>('A' + uniform_below(rng, 26));
                t.authors.emplace_back(surname_pool()[idx], initials);
            }
            const std::size_t n_words = 4 + uniform_below(rng, 6);
            for (std::size_t w = 0; w < n_words; ++w)
                t.title_words.push_back(
                    title_word_pool()[uniform_below(rng, title_word_pool().size())]);
            t.source = source_pool()[uniform_below(rng, source_pool().size())];
            t.year = 1950 + static_cast<int>(uniform_below(rng, 75));  // 1950..2024
            t.volume = 1 + static_cast<int>(uniform_below(rng, 150));
            t.issue = 1 + static_cast<int>(uniform_below(rng, 12));
            // Page numbers keep out of the 19xx/20xx band so they can never
            // be mistaken for years.
            t.page = 2100 + static_cast<int>(uniform_below(rng, 7700));
            t.page_end = t.page + 5 + static_cast<int>(uniform_below(rng, 36));

            // plain style never renders an issue
            if (style == "plain") t.issue = -1;
            else if (uniform_real(rng) < noise.field_dropout) t.issue = -1;

            int jitter_op = -1;
            if (uniform_real(rng) < noise.punctuation_jitter)
                jitter_op = static_cast<int>(uniform_below(rng, kJitterOpCount));

            auto [raw, truth] = render_reference(style, t, jitter_op);

            ReferenceRecord record;
            std::snprintf(id_buf, sizeof(id_buf), "d%05zu_r%03zu", doc, ref);
            record.ref_id = id_buf;
            record.doc_id = doc_id;
            record.raw = std::move(raw);
            record.truth = std::move(truth);
            corpus.records.push_back(std::move(record));
        }
    }
    return corpus;
}

}  // namespace parsrec
