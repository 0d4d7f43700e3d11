#pragma once

#include "expr.hpp"

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace tickcheck
{

// Every model variable is an unsigned 16-bit integer.
inline constexpr std::int64_t value_min = 0;
inline constexpr std::int64_t value_max = 65535;

struct ChannelDecl
{
    std::string name;
    int arity = 0; // 0: pure synchronization, 1: carries one integer

    friend bool operator==( const ChannelDecl&, const ChannelDecl& ) = default;
};

struct VarDecl
{
    std::string name;
    std::int64_t initial = 0;

    friend bool operator==( const VarDecl&, const VarDecl& ) = default;
};

enum class SyncDir
{
    Send,
    Receive,
};

struct SyncAction
{
    std::string channel;
    SyncDir dir = SyncDir::Send;
    std::optional< Expr > value;         // sender's payload (arity-1 channels)
    std::optional< std::string > target; // receiver's destination variable (arity-1 channels)

    friend bool operator==( const SyncAction&, const SyncAction& ) = default;
};

struct Assignment
{
    std::string target;
    Expr value;

    friend bool operator==( const Assignment&, const Assignment& ) = default;
};

struct Transition
{
    std::string src;
    std::string dst;
    std::optional< Expr > guard;
    std::optional< SyncAction > sync;
    std::vector< Assignment > effects;

    friend bool operator==( const Transition&, const Transition& ) = default;
};

struct Process
{
    std::string name;
    std::vector< VarDecl > locals;
    std::vector< std::string > states;
    std::string init;
    std::vector< std::string > accepting;
    std::vector< Transition > transitions;

    [[nodiscard]] std::optional< std::size_t > state_index( const std::string& s ) const
    {
        auto it = std::find( states.begin(), states.end(), s );
        if ( it == states.end() )
            return std::nullopt;
        return static_cast< std::size_t >( it - states.begin() );
    }

    friend bool operator==( const Process&, const Process& ) = default;
};

// A parsed model: channels, global variables and processes in declaration order.
// `property` optionally names one process acting as a property automaton; it is
// excluded from interleaving and observes the system instead.
struct Model
{
    std::vector< ChannelDecl > channels;
    std::vector< VarDecl > globals;
    std::vector< Process > processes;
    std::optional< std::string > property;

    [[nodiscard]] const ChannelDecl* find_channel( const std::string& name ) const
    {
        for ( const auto& c : channels )
            if ( c.name == name )
                return &c;
        return nullptr;
    }

    [[nodiscard]] std::optional< std::size_t > process_index( const std::string& name ) const
    {
        for ( std::size_t i = 0; i < processes.size(); ++i )
            if ( processes[ i ].name == name )
                return i;
        return std::nullopt;
    }

    [[nodiscard]] bool has_global( const std::string& name ) const
    {
        return std::any_of( globals.begin(), globals.end(), [ & ]( const VarDecl& v ) { return v.name == name; } );
    }

    friend bool operator==( const Model&, const Model& ) = default;
};

} // namespace tickcheck
