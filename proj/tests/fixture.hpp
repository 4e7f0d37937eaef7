// Deterministic 100-record fixture corpus with planted ground truth:
// known counts of PII entities, spam/blocklist/over-limit fields, and a
// known language composition. Both the pipeline tests and the acceptance
// checks compare toolkit output against the counts planted here.
#pragma once

#include "moltpipe/record.hpp"

#include <map>
#include <string>
#include <vector>

namespace fixture {

struct Truth {
    std::map<std::string, std::size_t> entities_by_type;  // planted, by type name
    std::size_t total_entities = 0;
    std::size_t spam_fields = 0;
    std::size_t blocklist_fields = 0;
    std::size_t too_long_fields = 0;
    std::size_t total_posts = 0;
    std::size_t total_comments = 0;
    std::size_t english_posts = 0;
    std::size_t spanish_posts = 0;
    std::size_t unique_communities = 0;
    std::vector<std::string> blocklist = {"claw the moon"};
    std::size_t length_limit_tokens = 50;
};

inline moltpipe::CommentNode make_comment(const std::string& id, const std::string& content,
                                          std::int64_t epoch,
                                          const std::string& parent = std::string()) {
    moltpipe::CommentNode c;
    c.id = id;
    c.content = content;
    if (!parent.empty()) c.parent_id = parent;
    c.created_at = moltpipe::format_iso8601(epoch);
    c.created_at_epoch = epoch;
    c.author_id = "user_" + id;
    c.author_name = "agent_" + id;
    return c;
}

inline std::pair<moltpipe::Corpus, Truth> make_corpus() {
    using moltpipe::PostRecord;
    moltpipe::Corpus corpus;
    Truth truth;

    const std::vector<std::string> english = {
        "I spent the whole morning reading threads about shell maintenance.",
        "The discussion in this community keeps getting better every week.",
        "Nobody expected the vote to swing that far in one afternoon.",
        "Here is a longer write up of what happened during the migration.",
        "Most replies agreed that the original claim was overstated.",
    };
    const std::vector<std::string> spanish = {
        "Pasé toda la mañana leyendo hilos sobre el mantenimiento del caparazón.",
        "La discusión en esta comunidad mejora cada semana que pasa.",
        "Nadie esperaba que la votación cambiara tanto en una sola tarde.",
        "Aquí hay un resumen más largo de lo que pasó durante la migración.",
        "La mayoría de las respuestas coincidieron en que la afirmación era exagerada.",
    };
    // type name -> planted snippet (each detects as exactly one entity).
    const std::vector<std::pair<std::string, std::string>> plants = {
        {"EMAIL_ADDRESS", "reach me at crabworker@example.org for details"},
        {"EMAIL_ADDRESS", "backup contact is ops.team@molt.example.com here"},
        {"API_KEY", "leaked key sk-abcdefghijklmnopqrstuv in the paste"},
        {"API_KEY", "config had sk-ZZ99__--aaaabbbbccccdddd committed"},
        {"SEED_PHRASE",
         "wallet backup legal winner thank year wave sausage worth useful legal winner thank "
         "yellow written down"},
        {"PASSWORD", "the admin password: hunter22b was reused"},
        {"CREDIT_CARD", "charged to 4532015112830366 by mistake"},
        {"IBAN_CODE", "transfer to GB82WEST12345698765432 cleared"},
        {"PHONE_NUMBER", "call +1 (415) 555-2671 tonight"},
        {"US_SSN", "the form listed 123-45-6789 in plain text"},
    };

    std::int64_t epoch = 1747200000;  // 2025-05-14T05:20:00Z
    std::size_t plant_cursor = 0;
    std::size_t comment_id = 0;

    for (int i = 0; i < 100; ++i) {
        const bool es = i % 5 == 4;  // 20 Spanish posts
        const auto& pool = es ? spanish : english;
        PostRecord p;
        p.post_id = "fx" + std::to_string(i);
        p.title = es ? "Un hilo sobre la comunidad numero " + std::to_string(i)
                     : "A thread about the community number " + std::to_string(i);
        p.content = pool[i % pool.size()] + " " + pool[(i + 2) % pool.size()];
        p.created_at_epoch = epoch + i * 3600;
        p.created_at = moltpipe::format_iso8601(p.created_at_epoch);
        p.upvotes = (i * 37) % 500;
        p.downvotes = (i * 11) % 40;
        p.submolt_id = "s" + std::to_string(i % 4);
        p.submolt_name = std::vector<std::string>{"general", "offmolt", "shellcare",
                                                  "askmoltbook"}[i % 4];
        p.author_id = "author_" + std::to_string(i % 15);
        p.author_name = "agent_" + std::to_string(i % 15);
        if (i % 10 == 0) p.url = "https://www.moltbook.com/post/fx" + std::to_string(i);
        if (i % 25 == 7) p.url = "https://github.com/example/repo";

        // Plant one PII snippet in every 7th post body (English posts only, so
        // language counts stay clean).
        if (i % 7 == 3 && !es && plant_cursor < plants.size()) {
            const auto& [type, snippet] = plants[plant_cursor++];
            p.content += " " + snippet + ".";
            ++truth.entities_by_type[type];
            ++truth.total_entities;
        }

        // Comments: a small tree on most posts.
        if (i % 3 != 2) {
            auto top = make_comment("c" + std::to_string(comment_id++),
                                    es ? "Estoy de acuerdo con casi todo lo dicho arriba."
                                       : "I agree with almost everything said above.",
                                    p.created_at_epoch + 40);
            if (i % 2 == 0) {
                auto reply = make_comment("c" + std::to_string(comment_id++),
                                          es ? "No estoy seguro de que eso sea correcto."
                                             : "I am not sure that part is actually correct.",
                                          p.created_at_epoch + 400, top.id);
                if (i % 6 == 0) {
                    auto deep = make_comment("c" + std::to_string(comment_id++),
                                             "The nested reply chain keeps this thread alive.",
                                             p.created_at_epoch + 900, reply.id);
                    reply.replies.push_back(deep);
                }
                top.replies.push_back(reply);
            }
            p.comments.push_back(top);
        }

        // Planted removals live in dedicated comments so post bodies keep
        // their language and PII roles.
        if (i == 10 || i == 30 || i == 50 || i == 70) {
            std::string spam;
            for (int k = 0; k < 12; ++k) spam += "molt ";
            p.comments.push_back(make_comment("c" + std::to_string(comment_id++), spam,
                                              p.created_at_epoch + 1200));
            ++truth.spam_fields;
        }
        if (i == 20 || i == 60) {
            p.comments.push_back(make_comment("c" + std::to_string(comment_id++),
                                              "they really claw the moon around here",
                                              p.created_at_epoch + 1300));
            ++truth.blocklist_fields;
        }
        if (i == 40) {
            std::string huge;
            for (int k = 0; k < 60; ++k) huge += "tok" + std::to_string(k) + " ";
            p.comments.push_back(make_comment("c" + std::to_string(comment_id++), huge,
                                              p.created_at_epoch + 1400));
            ++truth.too_long_fields;
        }

        p.comment_count = static_cast<std::int64_t>(moltpipe::count_comments(p));
        truth.total_comments += static_cast<std::size_t>(p.comment_count);
        if (es) ++truth.spanish_posts;
        else ++truth.english_posts;
        corpus.posts.push_back(std::move(p));
    }
    truth.total_posts = 100;
    truth.unique_communities = 4;
    return {std::move(corpus), truth};
}

}  // namespace fixture
