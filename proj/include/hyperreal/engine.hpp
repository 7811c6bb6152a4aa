#pragma once

#include <hyperreal/commands.hpp>
#include <hyperreal/eval.hpp>
#include <hyperreal/expectations.hpp>
#include <hyperreal/integration.hpp>
#include <hyperreal/json_render.hpp>
#include <hyperreal/nsprob.hpp>
#include <hyperreal/numerosity.hpp>
#include <hyperreal/streams.hpp>
#include <hyperreal/summation.hpp>
#include <hyperreal/worlds.hpp>
