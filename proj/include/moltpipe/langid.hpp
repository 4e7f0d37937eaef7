#pragma once

#include "moltpipe/record.hpp"

#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace moltpipe {

struct LangTag {
    std::string lang;
    double score = 0.0;  // in [0,1]
};

class Classifier {
public:
    virtual ~Classifier() = default;
    virtual const std::vector<std::string>& labels() const = 0;
    // Deterministic; throws std::invalid_argument on empty text.
    virtual LangTag identify(std::string_view text) const = 0;
};

// Character 1-3-gram multinomial naive Bayes. The built-in model is
// derived from small embedded seed texts; a fastText-style external model
// can be substituted through the Classifier interface.
class NgramClassifier : public Classifier {
public:
    // lang -> gram -> count
    using Profiles = std::unordered_map<std::string, std::unordered_map<std::string, std::uint32_t>>;

    explicit NgramClassifier(Profiles profiles);

    static const NgramClassifier& builtin();
    // TSV: header "moltpipe-langid<TAB>1", then "lang<TAB>ngram<TAB>count".
    static NgramClassifier load(const std::string& path);
    void save(const std::string& path) const;

    const std::vector<std::string>& labels() const override { return labels_; }
    LangTag identify(std::string_view text) const override;

private:
    struct LangModel {
        std::unordered_map<std::string, double> log_prob;
        double unseen_log_prob = 0.0;
    };
    std::vector<std::string> labels_;
    std::vector<LangModel> models_;
    Profiles profiles_;
};

// Sets lang/lang_score on the post and on every comment node; sentinel and
// empty fields are left untagged. Returns the number of fields tagged.
std::size_t tag_record(PostRecord& record, const Classifier& classifier);

}  // namespace moltpipe
