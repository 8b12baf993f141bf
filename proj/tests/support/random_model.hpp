#pragma once

#include <random>
#include <string>
#include <vector>

#include "arcades/code_model.hpp"

namespace arcades::testkit {

struct RandomModelOptions {
    std::size_t max_packages = 5;
    std::size_t max_classes = 30;
    std::size_t max_fields = 8;
    std::size_t max_methods = 10;
    std::size_t max_params = 7;
    bool with_repo_stats = true;
};

/// Valid random model: ids unique, references resolve or are external.
inline CodeModel random_model(std::mt19937& rng, const RandomModelOptions& opt = {}) {
    auto pick = [&](std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng); };
    auto coin = [&](double p) { return std::bernoulli_distribution(p)(rng); };

    CodeModel m;
    const std::size_t npkg = pick(1, opt.max_packages);
    for (std::size_t p = 0; p < npkg; ++p) {
        PackageEntity pkg;
        pkg.id = "pkg:p" + std::to_string(p);
        pkg.name = "p" + std::to_string(p);
        m.packages.push_back(pkg);
    }
    const std::size_t ncls = pick(0, opt.max_classes);
    std::vector<std::string> class_ids;
    for (std::size_t i = 0; i < ncls; ++i) class_ids.push_back("cls:C" + std::to_string(i));

    auto random_ref = [&](auto& self, int depth) -> TypeRef {
        TypeRef t;
        if (!class_ids.empty() && coin(0.6)) {
            t.target = class_ids[pick(0, class_ids.size() - 1)];
        } else {
            t.target = coin(0.5) ? "int" : "ext::Thing" + std::to_string(pick(0, 3));
            t.external = true;
        }
        t.mode = static_cast<RefMode>(pick(0, 2));
        if (depth < 2 && coin(0.2)) {
            const auto n = pick(1, 2);
            for (std::size_t k = 0; k < n; ++k) t.template_args.push_back(self(self, depth + 1));
        }
        return t;
    };

    for (std::size_t i = 0; i < ncls; ++i) {
        ClassEntity c;
        c.id = class_ids[i];
        c.name = "C" + std::to_string(i);
        const auto& pkg = m.packages[pick(0, npkg - 1)];
        c.package_id = pkg.id;
        c.file_id = pkg.name + "/f" + std::to_string(pick(0, 2)) + ".moo";
        const auto nb = pick(0, 2);
        for (std::size_t b = 0; b < nb; ++b) {
            auto t = random_ref(random_ref, 2);
            t.mode = RefMode::Value;
            c.bases.push_back(t);
        }
        const auto nf = pick(0, opt.max_fields);
        for (std::size_t f = 0; f < nf; ++f) {
            FieldEntity fe;
            fe.name = "f" + std::to_string(f);
            fe.id = "fld:" + c.name + "::" + fe.name;
            fe.type_ref = random_ref(random_ref, 0);
            fe.access = coin(0.5) ? Access::Public : Access::Private;
            c.fields.push_back(fe);
        }
        const auto nm = coin(0.15) ? 0 : pick(1, opt.max_methods);
        std::size_t body_total = 0;
        for (std::size_t k = 0; k < nm; ++k) {
            MethodEntity mt;
            mt.name = "m" + std::to_string(k);
            mt.id = "mth:" + c.name + "::" + mt.name + "#" + std::to_string(k);
            mt.access = coin(0.6) ? Access::Public : Access::Private;
            const auto np = pick(0, opt.max_params);
            for (std::size_t q = 0; q < np; ++q) mt.params.push_back(random_ref(random_ref, 0));
            mt.body_line_count = pick(0, 80);
            mt.call_site_count = pick(0, 20);
            body_total += mt.body_line_count;
            c.methods.push_back(mt);
        }
        c.line_count = body_total + nf + nm + 2;
        for (auto& p : m.packages)
            if (p.id == c.package_id) p.file_ids.push_back(c.file_id);
        m.classes.push_back(std::move(c));
    }

    m.reference_time = 1'700'000'000 + static_cast<std::int64_t>(pick(0, 1000)) * 86400;
    if (opt.with_repo_stats && coin(0.7)) {
        RepoStats rs;
        for (const auto& c : m.classes) {
            if (!coin(0.8)) continue;
            auto& st = rs.files[c.file_id];
            st.commit_count = pick(1, 40);
            const auto people = pick(1, 4);
            for (std::size_t k = 0; k < people; ++k) st.contributors.insert("dev" + std::to_string(pick(0, 6)));
            st.last_modified = m.reference_time - static_cast<std::int64_t>(pick(0, 400)) * 86400;
        }
        m.repo_stats = rs;
    }
    validate(m);
    return m;
}

}  // namespace arcades::testkit
