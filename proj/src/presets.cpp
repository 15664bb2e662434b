#include "veribond/presets.hpp"

#include <stdexcept>

namespace veribond {

namespace {

ScenarioConfig all_honest() {
    ScenarioConfig cfg;
    cfg.seed = 42;
    cfg.contests = 50;
    cfg.beta_minor = 1000;
    cfg.viewers = 10;
    cfg.evaluators_per_contest = 3;
    cfg.engine.jury.panel_size = 11;
    cfg.engine.jury.bench_size = 11;

    AgentGroup honest;
    honest.kind = StrategyKind::HonestCreator;
    honest.count = 3;
    honest.accuracy = 0.8;

    AgentGroup misinfo;
    misinfo.kind = StrategyKind::MisinfoCreator;
    misinfo.count = 2;
    misinfo.accuracy = 0.2;

    AgentGroup watchdogs;
    watchdogs.kind = StrategyKind::DiligentChallenger;
    watchdogs.count = 3;
    watchdogs.detection_skill = 1.0;

    AgentGroup jurors;
    jurors.kind = StrategyKind::DiligentJuror;
    jurors.count = 30;
    jurors.error_rate = 0.0;

    cfg.agents = {honest, misinfo, watchdogs, jurors};
    return cfg;
}

ScenarioConfig collusion_sweep() {
    ScenarioConfig cfg;
    cfg.seed = 7;
    cfg.contests = 400;
    cfg.beta_minor = 1000;
    cfg.viewers = 10;
    cfg.evaluators_per_contest = 0;
    cfg.engine.jury.panel_size = 11;
    cfg.engine.jury.bench_size = 5;

    AgentGroup creators;
    creators.kind = StrategyKind::HonestCreator;
    creators.count = 4;
    creators.accuracy = 1.0;  // only true content; every challenge is frivolous

    AgentGroup skeptic;
    skeptic.kind = StrategyKind::FrivolousChallenger;
    skeptic.count = 1;
    skeptic.challenge_rate = 1.0;

    AgentGroup honest_jurors;
    honest_jurors.kind = StrategyKind::DiligentJuror;
    honest_jurors.count = 90;
    honest_jurors.error_rate = 0.0;

    AgentGroup bloc;
    bloc.kind = StrategyKind::ColludingJuror;
    bloc.count = 10;
    bloc.bloc = 1;
    bloc.target = Vote::ForChallenger;

    cfg.agents = {creators, skeptic, honest_jurors, bloc};
    return cfg;
}

ScenarioConfig mixed_adversarial() {
    ScenarioConfig cfg;
    cfg.seed = 99;
    cfg.contests = 120;
    cfg.beta_minor = 2000;
    cfg.viewers = 15;
    cfg.evaluators_per_contest = 3;
    cfg.engine.jury.panel_size = 11;
    cfg.engine.jury.bench_size = 11;

    AgentGroup honest;
    honest.kind = StrategyKind::HonestCreator;
    honest.count = 4;
    honest.accuracy = 0.9;

    AgentGroup misinfo;
    misinfo.kind = StrategyKind::MisinfoCreator;
    misinfo.count = 2;
    misinfo.accuracy = 0.25;

    AgentGroup watchdogs;
    watchdogs.kind = StrategyKind::DiligentChallenger;
    watchdogs.count = 3;
    watchdogs.detection_skill = 0.85;

    AgentGroup troll;
    troll.kind = StrategyKind::FrivolousChallenger;
    troll.count = 1;
    troll.challenge_rate = 0.1;

    AgentGroup diligent;
    diligent.kind = StrategyKind::DiligentJuror;
    diligent.count = 30;
    diligent.error_rate = 0.1;

    AgentGroup lazy;
    lazy.kind = StrategyKind::LazyJuror;
    lazy.count = 6;
    lazy.abstain_prob = 0.4;
    lazy.error_rate = 0.2;
    lazy.bond_decline_prob = 0.2;

    AgentGroup bloc;
    bloc.kind = StrategyKind::ColludingJuror;
    bloc.count = 4;
    bloc.bloc = 1;
    bloc.target = Vote::ForCreator;

    cfg.agents = {honest, misinfo, watchdogs, troll, diligent, lazy, bloc};
    return cfg;
}

}  // namespace

std::vector<std::string> preset_names() {
    return {"all-honest", "collusion-sweep", "mixed-adversarial"};
}

ScenarioConfig preset_scenario(const std::string& name) {
    if (name == "all-honest") return all_honest();
    if (name == "collusion-sweep") return collusion_sweep();
    if (name == "mixed-adversarial") return mixed_adversarial();
    throw std::invalid_argument("unknown preset scenario '" + name + "'");
}

}  // namespace veribond
