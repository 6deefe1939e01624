#pragma once

#include "tcpurify/closed_form.hpp"
#include "tcpurify/conditional.hpp"
#include "tcpurify/dynamics.hpp"
#include "tcpurify/errors.hpp"
#include "tcpurify/hilbert.hpp"
#include "tcpurify/named_states.hpp"
#include "tcpurify/protocol.hpp"
#include "tcpurify/random_states.hpp"
#include "tcpurify/verify.hpp"
