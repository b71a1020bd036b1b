#include "mesochain/serialize.hpp"

namespace mesochain {

namespace {

template <class Json>
void
potential_to(Json& j, const PowerLawPotential& pot)
{
  j = Json::object();
  j["c_r"] = pot.c_r;
  j["p"] = pot.p;
  j["x_star"] = pot.x_star;
}

template <class Json>
void
chain_to(Json& j, const ChainConfig& cfg)
{
  j = Json::object();
  j["n"] = cfg.n;
  j["l"] = cfg.l;
  j["m"] = cfg.m;
  Json pot;
  potential_to(pot, cfg.potential);
  j["potential"] = pot;
  j["wall_stiffness"] = cfg.wall_stiffness;
  j["wall_offset_half_h"] = cfg.wall_offset_half_h;
  j["dt"] = cfg.dt;
}

} // namespace

void
to_json(nlohmann::json& j, const PowerLawPotential& pot)
{
  potential_to(j, pot);
}

void
to_json(nlohmann::ordered_json& j, const PowerLawPotential& pot)
{
  potential_to(j, pot);
}

void
from_json(const nlohmann::json& j, PowerLawPotential& pot)
{
  pot.c_r = j.value("c_r", pot.c_r);
  pot.p = j.value("p", pot.p);
  pot.x_star = j.value("x_star", pot.x_star);
}

void
to_json(nlohmann::json& j, const ChainConfig& cfg)
{
  chain_to(j, cfg);
}

void
to_json(nlohmann::ordered_json& j, const ChainConfig& cfg)
{
  chain_to(j, cfg);
}

void
from_json(const nlohmann::json& j, ChainConfig& cfg)
{
  cfg.n = j.at("n").get<std::size_t>();
  cfg.l = j.value("l", cfg.l);
  cfg.m = j.value("m", cfg.m);
  if (j.contains("potential"))
    cfg.potential = j.at("potential").get<PowerLawPotential>();
  cfg.wall_stiffness = j.value("wall_stiffness", cfg.potential.c_r);
  cfg.wall_offset_half_h = j.value("wall_offset_half_h", false);
  cfg.dt = j.contains("dt") ? j.at("dt").get<double>() : cfg.default_dt();
}

} // namespace mesochain
