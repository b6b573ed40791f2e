#include "matchup/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "matchup/rng.hpp"

namespace matchup {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct RawCounts {
    long long n = 0;
    std::array<std::array<long long, kNumOutcomes>, 2> by_hand{};
};

std::vector<PlayerSummary> summarize(
    const std::vector<PlateAppearanceRecord>& records, bool pitcher_side) {
    std::map<std::string, RawCounts> acc;
    for (const auto& rec : records) {
        const std::string& id = pitcher_side ? rec.pitcher_id : rec.batter_id;
        RawCounts& rc = acc[id];
        rc.n += 1;
        rc.by_hand[static_cast<int>(rec.handedness())]
                  [static_cast<int>(rec.outcome)] += 1;
    }
    std::vector<PlayerSummary> out;
    out.reserve(acc.size());
    for (const auto& [id, rc] : acc) {
        PlayerSummary s;
        s.player_id = id;
        s.pa = rc.n;
        long long n_opp = 0, n_same = 0;
        for (int i = 0; i < kNumOutcomes; ++i) {
            n_opp += rc.by_hand[0][i];
            n_same += rc.by_hand[1][i];
            s.rates[i] = static_cast<double>(rc.by_hand[0][i] +
                                             rc.by_hand[1][i]) /
                         static_cast<double>(rc.n);
        }
        for (int i = 0; i < kNumOutcomes; ++i) {
            if (n_opp == 0 || n_same == 0) {
                s.offsets[i] = 1.0;
                continue;
            }
            // Add-half smoothing keeps both rates interior so the log ratio
            // is finite; r = base^offset (opposite) vs base^(1/offset) (same)
            // gives offset^2 = ln r_opp / ln r_same.
            double r_opp = (static_cast<double>(rc.by_hand[0][i]) + 0.5) /
                           (static_cast<double>(n_opp) + 4.5);
            double r_same = (static_cast<double>(rc.by_hand[1][i]) + 0.5) /
                            (static_cast<double>(n_same) + 4.5);
            double o = std::sqrt(std::log(r_opp) / std::log(r_same));
            s.offsets[i] = std::min(4.0, std::max(0.25, o));
        }
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace

std::vector<PlayerSummary> summarize_pitchers(
    const std::vector<PlateAppearanceRecord>& records) {
    return summarize(records, true);
}

std::vector<PlayerSummary> summarize_batters(
    const std::vector<PlateAppearanceRecord>& records) {
    return summarize(records, false);
}

void PriorSpec::validate() const {
    for (int i = 0; i < kNumOutcomes; ++i) {
        if (!(base[i].alpha > 0.0) || !(base[i].beta > 0.0) ||
            !(offset[i].shape > 0.0) || !(offset[i].rate > 0.0))
            throw std::invalid_argument(
                "prior hyperparameters must be strictly positive");
    }
}

PriorSpec fit_priors(const std::vector<PlayerSummary>& summaries,
                     long long min_pa) {
    std::vector<const PlayerSummary*> qual;
    for (const auto& s : summaries)
        if (s.pa >= min_pa) qual.push_back(&s);
    if (qual.size() < 2)
        throw InsufficientDataError(
            "prior fit needs at least 2 players with " +
            std::to_string(min_pa) + "+ plate appearances, have " +
            std::to_string(qual.size()));
    PriorSpec spec;
    std::vector<double> vals(qual.size());
    for (int i = 0; i < kNumOutcomes; ++i) {
        for (std::size_t j = 0; j < qual.size(); ++j)
            vals[j] = qual[j]->rates[i];
        double m = std::min(1.0 - 1e-4, std::max(1e-4, mean_of(vals)));
        spec.base[i] = beta_moment_match(m, variance_of(vals));
        for (std::size_t j = 0; j < qual.size(); ++j)
            vals[j] = qual[j]->offsets[i];
        spec.offset[i] = gamma_moment_match(mean_of(vals), variance_of(vals));
    }
    return spec;
}

LikelihoodContext make_likelihood_context(
    const std::vector<PlateAppearanceRecord>& records, ModelStructure s) {
    LikelihoodContext ctx;
    ctx.league = league_rates(records);
    ctx.order = batting_order_rates(records, ctx.league);
    ctx.parametric_batters = s == ModelStructure::PitcherBatter;
    return ctx;
}

double log_likelihood(const ModelParams& params,
                      const std::vector<PlateAppearanceRecord>& data,
                      const LikelihoodContext& ctx) {
    double ll = 0.0;
    for (const auto& rec : data) {
        auto pit = params.pitchers.find(rec.pitcher_id);
        if (pit == params.pitchers.end())
            throw std::invalid_argument("no parameters for pitcher " +
                                        rec.pitcher_id);
        Handedness h = rec.handedness();
        Simplex9 dist;
        if (ctx.parametric_batters) {
            auto bat = params.batters.find(rec.batter_id);
            if (bat == params.batters.end())
                throw std::invalid_argument("no parameters for batter " +
                                            rec.batter_id);
            dist = outcome_distribution(pit->second, bat->second,
                                        ctx.league.at(h), params.weights, h);
        } else {
            dist = outcome_distribution(pit->second,
                                        ctx.order.at(rec.batting_order, h),
                                        ctx.league.at(h), params.weights, h);
        }
        ll += std::log(dist[static_cast<int>(rec.outcome)]);
    }
    return ll;
}

namespace {

double params_log_prior(const PlayerParams& p, const PriorSpec& prior) {
    double lp = 0.0;
    for (int i = 0; i < kNumOutcomes; ++i) {
        if (!(p.base[i] > 0.0 && p.base[i] < 1.0) || !(p.offset[i] > 0.0))
            return kNegInf;
        lp += log_beta_pdf(p.base[i], prior.base[i]);
        lp += log_gamma_pdf(p.offset[i], prior.offset[i]);
    }
    return lp;
}

}  // namespace

double log_prior(const ModelParams& params, const PriorSpec& priors,
                 const PriorSpec& batter_priors, bool parametric_batters) {
    if (!params.weights.valid()) return kNegInf;
    double lp = 0.0;
    for (const auto& [id, p] : params.pitchers) lp += params_log_prior(p, priors);
    if (parametric_batters)
        for (const auto& [id, p] : params.batters)
            lp += params_log_prior(p, batter_priors);
    return lp;
}

double log_posterior(const ModelParams& params,
                     const std::vector<PlateAppearanceRecord>& data,
                     const PriorSpec& priors, const LikelihoodContext& ctx,
                     const PriorSpec* batter_priors) {
    if (data.empty()) throw std::invalid_argument("log_posterior: no data");
    double lp = log_prior(params, priors, batter_priors ? *batter_priors : priors,
                          ctx.parametric_batters);
    if (lp == kNegInf || std::isnan(lp)) return lp;
    return lp + log_likelihood(params, data, ctx);
}

void SamplerConfig::validate() const {
    if (steps < 1) throw std::invalid_argument("sampler: steps must be >= 1");
    if (burn_in < 0 || burn_in >= steps)
        throw std::invalid_argument("sampler: need 0 <= burn_in < steps");
    if (!(prob_scale > 0.0) || !(offset_scale > 0.0) || !(weight_scale > 0.0))
        throw std::invalid_argument("sampler: proposal scales must be positive");
}

PlayerParams PlayerPosterior::params() const {
    return PlayerParams{base_mean, offset_mean};
}

// ---------------------------------------------------------------------------
// Sampler internals. The likelihood is reduced to sufficient statistics:
// outcome counts per (pitcher, batter-or-order-slot, handedness) cell. Each
// cell caches the three logit vectors entering the combination formula, so a
// block update touches only the cells it owns.

namespace {

struct Cell {
    int pitcher = -1;
    int batter = -1;  // -1: batter side is the order-table row
    int order = 1;
    int hand = 0;
    std::array<double, kNumOutcomes> counts{};
    std::array<double, kNumOutcomes> la{}, lb{}, lc{};
    double loglik = 0.0;
};

double cell_loglik(const Cell& c, const double* P, const double* B) {
    double x[kNumOutcomes];
    double sum = 0.0;
    for (int i = 0; i < kNumOutcomes; ++i) {
        double s = P[i] * c.la[i] + B[i] * c.lb[i] -
                   (P[i] + B[i] - 1.0) * c.lc[i];
        x[i] = sigmoid(s);
        sum += x[i];
    }
    double logsum = std::log(sum);
    double ll = 0.0;
    for (int i = 0; i < kNumOutcomes; ++i)
        if (c.counts[i] > 0.0) ll += c.counts[i] * (std::log(x[i]) - logsum);
    return ll;
}

// Adjusted logits for one player-hand combination given transformed state
// (z = logit base, t = log offset).
std::array<double, kNumOutcomes> adjusted_logits(
    const std::array<double, kNumOutcomes>& z,
    const std::array<double, kNumOutcomes>& t, int hand) {
    std::array<double, kNumOutcomes> out;
    for (int i = 0; i < kNumOutcomes; ++i) {
        double base = sigmoid(z[i]);
        double expo = hand == 0 ? std::exp(t[i]) : std::exp(-t[i]);
        out[i] = logit(clamp_prob(std::pow(base, expo)));
    }
    return out;
}

double base_block_prior(const std::array<double, kNumOutcomes>& z,
                        const PriorSpec& prior) {
    // Beta density of sigmoid(z) plus the logit-transform Jacobian p(1-p).
    double lp = 0.0;
    for (int i = 0; i < kNumOutcomes; ++i) {
        double p = sigmoid(z[i]);
        if (p <= 0.0 || p >= 1.0) return kNegInf;
        lp += log_beta_pdf(p, prior.base[i]) + std::log(p) + std::log1p(-p);
    }
    return lp;
}

double offset_block_prior(const std::array<double, kNumOutcomes>& t,
                          const PriorSpec& prior) {
    // Gamma density of exp(t) plus the log-transform Jacobian exp(t).
    double lp = 0.0;
    for (int i = 0; i < kNumOutcomes; ++i) {
        double o = std::exp(t[i]);
        if (!(o > 0.0) || !std::isfinite(o)) return kNegInf;
        lp += log_gamma_pdf(o, prior.offset[i]) + t[i];
    }
    return lp;
}

struct CellSet {
    std::vector<std::string> pitcher_ids;
    std::vector<std::string> batter_ids;
    std::vector<Cell> cells;
    std::vector<std::vector<int>> of_pitcher;
    std::vector<std::vector<int>> of_batter;
};

CellSet build_cells(const std::vector<PlateAppearanceRecord>& data,
                    const LikelihoodContext& ctx,
                    const std::vector<std::string>& extra_pitchers,
                    const std::vector<std::string>& extra_batters) {
    std::set<std::string> pids(extra_pitchers.begin(), extra_pitchers.end());
    std::set<std::string> bids;
    if (ctx.parametric_batters)
        bids.insert(extra_batters.begin(), extra_batters.end());
    for (const auto& rec : data) {
        pids.insert(rec.pitcher_id);
        if (ctx.parametric_batters) bids.insert(rec.batter_id);
    }
    CellSet cs;
    cs.pitcher_ids.assign(pids.begin(), pids.end());
    cs.batter_ids.assign(bids.begin(), bids.end());
    std::map<std::string, int> pidx, bidx;
    for (std::size_t i = 0; i < cs.pitcher_ids.size(); ++i)
        pidx[cs.pitcher_ids[i]] = static_cast<int>(i);
    for (std::size_t i = 0; i < cs.batter_ids.size(); ++i)
        bidx[cs.batter_ids[i]] = static_cast<int>(i);

    std::map<std::array<int, 4>, int> index;
    for (const auto& rec : data) {
        int p = pidx[rec.pitcher_id];
        int b = ctx.parametric_batters ? bidx[rec.batter_id] : -1;
        int ord = ctx.parametric_batters ? 0 : rec.batting_order;
        int h = static_cast<int>(rec.handedness());
        std::array<int, 4> key{p, b, ord, h};
        auto [it, fresh] = index.try_emplace(key, static_cast<int>(cs.cells.size()));
        if (fresh) {
            Cell c;
            c.pitcher = p;
            c.batter = b;
            c.order = ord == 0 ? 1 : ord;
            c.hand = h;
            for (int i = 0; i < kNumOutcomes; ++i)
                c.lc[i] = logit(ctx.league.by_hand[h][i]);
            if (!ctx.parametric_batters) {
                const Simplex9& row = ctx.order.at(rec.batting_order, rec.handedness());
                for (int i = 0; i < kNumOutcomes; ++i) c.lb[i] = logit(row[i]);
            }
            cs.cells.push_back(c);
        }
        cs.cells[it->second].counts[static_cast<int>(rec.outcome)] += 1.0;
    }
    cs.of_pitcher.resize(cs.pitcher_ids.size());
    cs.of_batter.resize(cs.batter_ids.size());
    for (std::size_t ci = 0; ci < cs.cells.size(); ++ci) {
        cs.of_pitcher[cs.cells[ci].pitcher].push_back(static_cast<int>(ci));
        if (cs.cells[ci].batter >= 0)
            cs.of_batter[cs.cells[ci].batter].push_back(static_cast<int>(ci));
    }
    return cs;
}

}  // namespace

PosteriorSummary sample_posterior(const std::vector<PlateAppearanceRecord>& data,
                                  const PriorSpec& priors,
                                  const SamplerConfig& config,
                                  ModelStructure structure,
                                  const std::vector<std::string>& extra_pitchers,
                                  const std::vector<std::string>& extra_batters,
                                  const PriorSpec* batter_priors) {
    config.validate();
    priors.validate();
    const PriorSpec& bprior = batter_priors ? *batter_priors : priors;
    bprior.validate();
    if (data.empty())
        throw std::invalid_argument("sample_posterior: no data");

    LikelihoodContext ctx = make_likelihood_context(data, structure);
    CellSet cs = build_cells(data, ctx, extra_pitchers, extra_batters);
    const int nP = static_cast<int>(cs.pitcher_ids.size());
    const int nB = static_cast<int>(cs.batter_ids.size());

    using Vec9 = std::array<double, kNumOutcomes>;
    std::vector<Vec9> pz(nP), pt(nP), bz(nB), bt(nB);
    for (int i = 0; i < kNumOutcomes; ++i) {
        double z0 = logit(clamp_prob(priors.base[i].mean()));
        double t0 = std::log(priors.offset[i].mean());
        for (int p = 0; p < nP; ++p) {
            pz[p][i] = z0;
            pt[p][i] = t0;
        }
        double zb = logit(clamp_prob(bprior.base[i].mean()));
        double tb = std::log(bprior.offset[i].mean());
        for (int b = 0; b < nB; ++b) {
            bz[b][i] = zb;
            bt[b][i] = tb;
        }
    }
    double Parr[kNumOutcomes], Barr[kNumOutcomes];
    double u[kNumOutcomes], v[kNumOutcomes];
    for (int i = 0; i < kNumOutcomes; ++i) {
        u[i] = 1.5;
        v[i] = 0.0;
        Parr[i] = 0.75;
        Barr[i] = 0.75;
    }

    // Initialize per-cell logits and likelihoods.
    for (auto& c : cs.cells) {
        c.la = adjusted_logits(pz[c.pitcher], pt[c.pitcher], c.hand);
        if (c.batter >= 0)
            c.lb = adjusted_logits(bz[c.batter], bt[c.batter], c.hand);
        c.loglik = cell_loglik(c, Parr, Barr);
    }
    double total_ll = 0.0;
    for (const auto& c : cs.cells) total_ll += c.loglik;

    std::vector<double> p_base_pri(nP), p_off_pri(nP), b_base_pri(nB), b_off_pri(nB);
    for (int p = 0; p < nP; ++p) {
        p_base_pri[p] = base_block_prior(pz[p], priors);
        p_off_pri[p] = offset_block_prior(pt[p], priors);
    }
    for (int b = 0; b < nB; ++b) {
        b_base_pri[b] = base_block_prior(bz[b], bprior);
        b_off_pri[b] = offset_block_prior(bt[b], bprior);
    }
    // Block layout: pitcher bases, pitcher offsets, batter bases, batter
    // offsets, then the nine weight pairs. Each block owns a private stream.
    const int wOff = 2 * nP + 2 * nB;
    const int nBlocks = wOff + kNumOutcomes;
    std::vector<Engine> eng;
    eng.reserve(nBlocks);
    for (int b = 0; b < nBlocks; ++b)
        eng.push_back(make_engine(config.seed, 0xB10C5EEDULL, b));
    std::vector<double> scale(nBlocks);
    for (int p = 0; p < nP; ++p) {
        scale[2 * p] = config.prob_scale;
        scale[2 * p + 1] = config.offset_scale;
    }
    for (int b = 0; b < nB; ++b) {
        scale[2 * nP + 2 * b] = config.prob_scale;
        scale[2 * nP + 2 * b + 1] = config.offset_scale;
    }
    for (int i = 0; i < kNumOutcomes; ++i)
        scale[wOff + i] = config.weight_scale;

    // Posterior accumulators over kept sweeps.
    std::vector<Vec9> p_base_sum(nP, Vec9{}), p_base_sq(nP, Vec9{});
    std::vector<Vec9> p_off_sum(nP, Vec9{}), p_off_sq(nP, Vec9{});
    std::vector<Vec9> b_base_sum(nB, Vec9{}), b_base_sq(nB, Vec9{});
    std::vector<Vec9> b_off_sum(nB, Vec9{}), b_off_sq(nB, Vec9{});
    Vec9 w_p_sum{}, w_b_sum{};
    std::vector<double> lp_trace;
    lp_trace.reserve(config.steps - config.burn_in);

    long long kept_proposals = 0, kept_accepts = 0;
    std::vector<int> touched;
    std::vector<Vec9> new_l;
    std::vector<double> new_ll;

    // One player block proposal: perturbs 9 coordinates, re-evaluates the
    // player's cells, standard Metropolis accept.
    auto player_block = [&](int block_id, Vec9& state, const Vec9& partner,
                            bool is_base, bool pitcher_side, int player,
                            double& pri_cache, const PriorSpec& pri,
                            bool adapt, int sweep) {
        Engine& e = eng[block_id];
        double s = scale[block_id];
        Vec9 prop = state;
        for (int i = 0; i < kNumOutcomes; ++i) prop[i] += s * rnd_norm(e);
        double uacc = rnd_uniform(e);
        double new_pri = is_base ? base_block_prior(prop, pri)
                                 : offset_block_prior(prop, pri);
        bool acc = false;
        if (new_pri > kNegInf) {
            const Vec9& z = is_base ? prop : partner;
            const Vec9& t = is_base ? partner : prop;
            const auto& owned = pitcher_side ? cs.of_pitcher[player]
                                             : cs.of_batter[player];
            touched.clear();
            new_l.clear();
            new_ll.clear();
            double dll = 0.0;
            for (int ci : owned) {
                Cell& c = cs.cells[ci];
                Vec9 l = adjusted_logits(z, t, c.hand);
                Vec9 saved = pitcher_side ? c.la : c.lb;
                (pitcher_side ? c.la : c.lb) = l;
                double ll = cell_loglik(c, Parr, Barr);
                (pitcher_side ? c.la : c.lb) = saved;
                touched.push_back(ci);
                new_l.push_back(l);
                new_ll.push_back(ll);
                dll += ll - c.loglik;
            }
            double delta = dll + new_pri - pri_cache;
            if (std::log(uacc) < delta) {
                acc = true;
                state = prop;
                pri_cache = new_pri;
                total_ll += dll;
                for (std::size_t j = 0; j < touched.size(); ++j) {
                    Cell& c = cs.cells[touched[j]];
                    (pitcher_side ? c.la : c.lb) = new_l[j];
                    c.loglik = new_ll[j];
                }
            }
        }
        if (adapt) {
            scale[block_id] *= std::exp(((acc ? 1.0 : 0.0) - 0.3) /
                                        std::pow(sweep + 1.0, 0.6));
        } else {
            ++kept_proposals;
            if (acc) ++kept_accepts;
        }
    };

    for (int sweep = 0; sweep < config.steps; ++sweep) {
        bool adapt = sweep < config.burn_in;
        for (int p = 0; p < nP; ++p) {
            player_block(2 * p, pz[p], pt[p], true, true, p, p_base_pri[p],
                         priors, adapt, sweep);
            player_block(2 * p + 1, pt[p], pz[p], false, true, p, p_off_pri[p],
                         priors, adapt, sweep);
        }
        for (int b = 0; b < nB; ++b) {
            player_block(2 * nP + 2 * b, bz[b], bt[b], true, false, b,
                         b_base_pri[b], bprior, adapt, sweep);
            player_block(2 * nP + 2 * b + 1, bt[b], bz[b], false, false, b,
                         b_off_pri[b], bprior, adapt, sweep);
        }
        for (int i = 0; i < kNumOutcomes; ++i) {
            int bid = wOff + i;
            Engine& e = eng[bid];
            double nu = u[i] + scale[bid] * rnd_norm(e);
            double nv = v[i] + scale[bid] * rnd_norm(e);
            double uacc = rnd_uniform(e);
            double Pn = 0.5 * (nu + nv);
            double Bn = 0.5 * (nu - nv);
            bool acc = false;
            bool feasible = Pn >= kWeightLo && Pn <= kWeightHi &&
                            Bn >= kWeightLo && Bn <= kWeightHi && nu >= 1.0 &&
                            nu <= 2.0;
            if (feasible) {
                double savedP = Parr[i], savedB = Barr[i];
                Parr[i] = Pn;
                Barr[i] = Bn;
                touched.clear();
                new_ll.clear();
                double dll = 0.0;
                for (std::size_t ci = 0; ci < cs.cells.size(); ++ci) {
                    double ll = cell_loglik(cs.cells[ci], Parr, Barr);
                    touched.push_back(static_cast<int>(ci));
                    new_ll.push_back(ll);
                    dll += ll - cs.cells[ci].loglik;
                }
                if (std::log(uacc) < dll) {
                    acc = true;
                    u[i] = nu;
                    v[i] = nv;
                    total_ll += dll;
                    for (std::size_t j = 0; j < new_ll.size(); ++j)
                        cs.cells[touched[j]].loglik = new_ll[j];
                } else {
                    Parr[i] = savedP;
                    Barr[i] = savedB;
                }
            }
            if (adapt) {
                scale[bid] *= std::exp(((acc ? 1.0 : 0.0) - 0.3) /
                                       std::pow(sweep + 1.0, 0.6));
            } else {
                ++kept_proposals;
                if (acc) ++kept_accepts;
            }
        }

        if (sweep >= config.burn_in) {
            for (int p = 0; p < nP; ++p) {
                for (int i = 0; i < kNumOutcomes; ++i) {
                    double pb = sigmoid(pz[p][i]);
                    double po = std::exp(pt[p][i]);
                    p_base_sum[p][i] += pb;
                    p_base_sq[p][i] += pb * pb;
                    p_off_sum[p][i] += po;
                    p_off_sq[p][i] += po * po;
                }
            }
            for (int b = 0; b < nB; ++b) {
                for (int i = 0; i < kNumOutcomes; ++i) {
                    double bb = sigmoid(bz[b][i]);
                    double bo = std::exp(bt[b][i]);
                    b_base_sum[b][i] += bb;
                    b_base_sq[b][i] += bb * bb;
                    b_off_sum[b][i] += bo;
                    b_off_sq[b][i] += bo * bo;
                }
            }
            for (int i = 0; i < kNumOutcomes; ++i) {
                w_p_sum[i] += Parr[i];
                w_b_sum[i] += Barr[i];
            }
            double pri_now = 0.0;
            for (int p = 0; p < nP; ++p) pri_now += p_base_pri[p] + p_off_pri[p];
            for (int b = 0; b < nB; ++b) pri_now += b_base_pri[b] + b_off_pri[b];
            lp_trace.push_back(total_ll + pri_now);
        }
    }

    if (kept_accepts == 0 && kept_proposals > 0) {
        throw SamplerError(
            "sampler accepted nothing after burn-in (" +
            std::to_string(kept_proposals) +
            " proposals); proposal scales likely diverged");
    }

    const double N = static_cast<double>(config.steps - config.burn_in);
    auto finish = [&](const Vec9& sum, const Vec9& sq, Simplex9& mean,
                      Simplex9& sd) {
        for (int i = 0; i < kNumOutcomes; ++i) {
            double m = sum[i] / N;
            mean[i] = m;
            sd[i] = std::sqrt(std::max(0.0, sq[i] / N - m * m));
        }
    };

    PosteriorSummary out;
    for (int p = 0; p < nP; ++p) {
        PlayerPosterior pp;
        finish(p_base_sum[p], p_base_sq[p], pp.base_mean, pp.base_sd);
        finish(p_off_sum[p], p_off_sq[p], pp.offset_mean, pp.offset_sd);
        out.pitchers[cs.pitcher_ids[p]] = pp;
    }
    for (int b = 0; b < nB; ++b) {
        PlayerPosterior pp;
        finish(b_base_sum[b], b_base_sq[b], pp.base_mean, pp.base_sd);
        finish(b_off_sum[b], b_off_sq[b], pp.offset_mean, pp.offset_sd);
        out.batters[cs.batter_ids[b]] = pp;
    }
    for (int i = 0; i < kNumOutcomes; ++i) {
        out.weights.pitcher[i] = w_p_sum[i] / N;
        out.weights.batter[i] = w_b_sum[i] / N;
    }
    out.acceptance_rate =
        kept_proposals > 0
            ? static_cast<double>(kept_accepts) / static_cast<double>(kept_proposals)
            : 0.0;

    // Effective sample estimate from the log-posterior trace: initial
    // positive-autocorrelation truncation.
    {
        std::size_t n = lp_trace.size();
        double m = 0.0;
        for (double x : lp_trace) m += x;
        m /= static_cast<double>(n);
        double c0 = 0.0;
        for (double x : lp_trace) c0 += (x - m) * (x - m);
        c0 /= static_cast<double>(n);
        if (c0 <= 0.0) {
            out.effective_samples = static_cast<double>(n);
        } else {
            double rho_sum = 0.0;
            std::size_t max_lag = std::min<std::size_t>(n - 1, 200);
            for (std::size_t k = 1; k <= max_lag; ++k) {
                double ck = 0.0;
                for (std::size_t t = 0; t + k < n; ++t)
                    ck += (lp_trace[t] - m) * (lp_trace[t + k] - m);
                ck /= static_cast<double>(n);
                double rho = ck / c0;
                if (rho <= 0.0) break;
                rho_sum += rho;
            }
            double ess = static_cast<double>(n) / (1.0 + 2.0 * rho_sum);
            out.effective_samples = std::min(static_cast<double>(n),
                                             std::max(1.0, ess));
        }
    }
    return out;
}

RecencyChains build_recency_chains(
    std::vector<PlateAppearanceRecord> player_records) {
    std::stable_sort(player_records.begin(), player_records.end(),
                     [](const PlateAppearanceRecord& a,
                        const PlateAppearanceRecord& b) { return a.date < b.date; });
    const int n = static_cast<int>(player_records.size());
    RecencyChains out;
    for (int idx = 0; idx < n; ++idx) {
        int from_recent = n - 1 - idx;
        int block = from_recent / 500 + 1;
        if (block > 4) continue;
        for (int j = 0; j <= 4 - block; ++j)
            out.chains[j].push_back(player_records[idx]);
    }
    return out;
}

std::array<std::vector<PlateAppearanceRecord>, 4> chain_datasets(
    const std::vector<PlateAppearanceRecord>& records) {
    const int n = static_cast<int>(records.size());
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return records[a].date < records[b].date;
    });

    // Position of each record within its pitcher's and batter's own
    // date-ordered histories.
    std::map<std::string, int> pitch_seen, bat_seen, pitch_total, bat_total;
    for (int i = 0; i < n; ++i) {
        pitch_total[records[i].pitcher_id] += 1;
        bat_total[records[i].batter_id] += 1;
    }
    std::vector<int> block(n);
    for (int k = 0; k < n; ++k) {
        const auto& rec = records[order[k]];
        int ppos = pitch_seen[rec.pitcher_id]++;
        int bpos = bat_seen[rec.batter_id]++;
        int p_from_recent = pitch_total[rec.pitcher_id] - 1 - ppos;
        int b_from_recent = bat_total[rec.batter_id] - 1 - bpos;
        int pblk = p_from_recent / 500 + 1;
        int bblk = b_from_recent / 500 + 1;
        block[k] = std::min(pblk, bblk);
    }
    std::array<std::vector<PlateAppearanceRecord>, 4> out;
    for (int k = 0; k < n; ++k) {
        if (block[k] > 4) continue;
        for (int j = 0; j <= 4 - block[k]; ++j)
            out[j].push_back(records[order[k]]);
    }
    return out;
}

}  // namespace matchup
