#pragma once

// Compiles timed skeletons into untimed models.
//
// LEDM: every timer is a global pair (ub_P_t, lb_P_t) and one Tick process owns a
// single self-loop that advances time for everybody, blocked while a hard upper
// bound has reached 0.
//
// SEDM: timers are locals (ub_t, lb_t); P_Tick hands out one tick per process in
// round-robin over chan1..chanN and each process advances its own timers in a
// receiving self-loop. A process whose hard upper bound reached 0 refuses the
// sync, so the tick cycle waits for it.
//
// A timer is hard when some Within or AfterDelay edge waits on it; InWindow-only
// timers lapse silently and never stop time.

#include "tickcheck/errors.hpp"
#include "tickcheck/expr.hpp"
#include "tickcheck/model.hpp"
#include "tickcheck/skeleton.hpp"

#include <algorithm>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace tickcheck
{

enum class Method
{
    LEDM,
    SEDM,
};

inline const char* method_name( Method m ) { return m == Method::LEDM ? "ledm" : "sedm"; }

inline std::optional< Method > parse_method( std::string_view s )
{
    if ( s == "ledm" || s == "LEDM" )
        return Method::LEDM;
    if ( s == "sedm" || s == "SEDM" )
        return Method::SEDM;
    return std::nullopt;
}

inline const char* tick_process_name( Method m ) { return m == Method::LEDM ? "Tick" : "P_Tick"; }

inline std::string sedm_channel( std::size_t i ) { return "chan" + std::to_string( i + 1 ); }

namespace detail
{

struct TimerNames
{
    std::string ub, lb;
};

using TimerNaming = std::function< TimerNames( const SkeletonProcess&, const std::string& ) >;

inline Expr timer_guard( Trigger trig, const TimerNames& t )
{
    using namespace expr;
    Expr lb_zero = binary( Op::Eq, var( t.lb ), lit( 0 ) );
    if ( trig == Trigger::InWindow )
        return binary( Op::And, binary( Op::Gt, var( t.ub ), lit( 0 ) ), std::move( lb_zero ) );
    return lb_zero;
}

// ub - (ub != INF) for hard timers (their guard keeps ub > 0); soft ones saturate at 0.
inline std::vector< Assignment > timer_decrements( const SkeletonProcess& p, const TimerNaming& naming,
                                                   std::int64_t infinity )
{
    using namespace expr;
    std::vector< Assignment > out;
    for ( const auto& t : p.timers )
    {
        const auto n = naming( p, t );
        Expr ub_step = binary( Op::Ne, var( n.ub ), lit( infinity ) );
        if ( !p.is_hard( t ) )
            ub_step = binary( Op::And, std::move( ub_step ), binary( Op::Ne, var( n.ub ), lit( 0 ) ) );
        out.push_back( { n.ub, binary( Op::Sub, var( n.ub ), std::move( ub_step ) ) } );
        out.push_back( { n.lb, binary( Op::Sub, var( n.lb ), binary( Op::Ne, var( n.lb ), lit( 0 ) ) ) } );
    }
    return out;
}

inline std::vector< Expr > hard_ub_positive( const SkeletonProcess& p, const TimerNaming& naming )
{
    std::vector< Expr > out;
    for ( const auto& t : p.timers )
        if ( p.is_hard( t ) )
            out.push_back( expr::binary( Op::Gt, expr::var( naming( p, t ).ub ), expr::lit( 0 ) ) );
    return out;
}

inline Expr now_step( std::int64_t maximal )
{
    using namespace expr;
    return binary( Op::Mod, binary( Op::Add, var( "now" ), lit( 1 ) ), lit( maximal ) );
}

// The skeleton edge as a system transition: trigger guard, user guard, user
// effects, resets of timers consumed at the source, then the edge's own sets.
inline Transition lower_edge( const SkeletonProcess& p, const SkeletonEdge& e, const TimerNaming& naming,
                              std::int64_t infinity )
{
    auto rename = [ & ]( const Expr& x ) {
        return rename_variables( x, [ & ]( const std::string& v ) { return p.has_timer( v ) ? naming( p, v ).ub : v; } );
    };
    Transition t;
    t.src = e.src;
    t.dst = e.dst;
    std::vector< Expr > guard;
    if ( e.trigger != Trigger::None )
        guard.push_back( timer_guard( e.trigger, naming( p, e.trigger_timer ) ) );
    if ( e.guard )
        guard.push_back( rename( *e.guard ) );
    if ( !guard.empty() )
        t.guard = expr::conjunction( std::move( guard ) );
    for ( const auto& a : e.effects )
        t.effects.push_back( { a.target, rename( a.value ) } );
    for ( const auto& c : p.consumed_at( e.src ) )
    {
        const bool reset_by_edge = std::any_of( e.sets.begin(), e.sets.end(), [ & ]( const TimerSet& s ) { return s.timer == c; } );
        if ( reset_by_edge )
            continue;
        const auto n = naming( p, c );
        t.effects.push_back( { n.ub, expr::lit( infinity ) } );
        t.effects.push_back( { n.lb, expr::lit( 0 ) } );
    }
    for ( const auto& s : e.sets )
    {
        const auto n = naming( p, s.timer );
        t.effects.push_back( { n.ub, s.ub ? rename( *s.ub ) : expr::lit( infinity ) } );
        t.effects.push_back( { n.lb, rename( s.lb ) } );
    }
    return t;
}

inline void check_fresh( const std::set< std::string >& taken, const std::string& name )
{
    if ( taken.count( name ) )
        throw ValidationError( "generated name '" + name + "' clashes with a skeleton name" );
}

} // namespace detail

inline Model gen_ledm( const TimedSkeleton& sk )
{
    validate_skeleton( sk );
    const auto& cfg = sk.config;
    detail::TimerNaming naming = []( const SkeletonProcess& p, const std::string& t ) {
        return detail::TimerNames{ "ub_" + p.name + "_" + t, "lb_" + p.name + "_" + t };
    };

    std::set< std::string > taken;
    for ( const auto& v : sk.shared )
        taken.insert( v.name );
    for ( const auto& p : sk.processes )
    {
        taken.insert( p.name );
        for ( const auto& v : p.locals )
            taken.insert( v.name );
    }

    Model m;
    m.globals = sk.shared;
    if ( sk.emits_now() )
        m.globals.push_back( { "now", 0 } );
    for ( const auto& p : sk.processes )
        for ( const auto& t : p.timers )
        {
            const auto n = naming( p, t );
            detail::check_fresh( taken, n.ub );
            detail::check_fresh( taken, n.lb );
            m.globals.push_back( { n.ub, cfg.infinity } );
            m.globals.push_back( { n.lb, 0 } );
        }

    detail::check_fresh( taken, tick_process_name( Method::LEDM ) );
    Process tick;
    tick.name = tick_process_name( Method::LEDM );
    tick.states = { "tick" };
    tick.init = "tick";
    Transition step{ "tick", "tick", std::nullopt, std::nullopt, {} };
    std::vector< Expr > guard;
    if ( sk.emits_now() )
        step.effects.push_back( { "now", detail::now_step( cfg.maximal ) } );
    for ( const auto& p : sk.processes )
    {
        for ( auto& g : detail::hard_ub_positive( p, naming ) )
            guard.push_back( std::move( g ) );
        for ( auto& a : detail::timer_decrements( p, naming, cfg.infinity ) )
            step.effects.push_back( std::move( a ) );
    }
    if ( !guard.empty() )
        step.guard = expr::conjunction( std::move( guard ) );
    tick.transitions.push_back( std::move( step ) );
    m.processes.push_back( std::move( tick ) );

    for ( const auto& p : sk.processes )
    {
        Process out;
        out.name = p.name;
        out.locals = p.locals;
        out.states = p.locations;
        out.init = p.init;
        for ( const auto& e : p.edges )
            out.transitions.push_back( detail::lower_edge( p, e, naming, cfg.infinity ) );
        m.processes.push_back( std::move( out ) );
    }
    return m;
}

inline Model gen_sedm( const TimedSkeleton& sk )
{
    validate_skeleton( sk );
    const auto& cfg = sk.config;
    detail::TimerNaming naming = []( const SkeletonProcess&, const std::string& t ) {
        return detail::TimerNames{ "ub_" + t, "lb_" + t };
    };

    std::set< std::string > taken;
    for ( const auto& v : sk.shared )
        taken.insert( v.name );
    for ( const auto& p : sk.processes )
        taken.insert( p.name );
    detail::check_fresh( taken, tick_process_name( Method::SEDM ) );

    Model m;
    m.globals = sk.shared;
    const std::size_t n = sk.processes.size();
    for ( std::size_t i = 0; i < n; ++i )
        m.channels.push_back( { sedm_channel( i ), 0 } );

    Process tick;
    tick.name = tick_process_name( Method::SEDM );
    for ( std::size_t i = 0; i < n; ++i )
        tick.states.push_back( "tick" + std::to_string( i + 1 ) );
    tick.init = tick.states.front();
    for ( std::size_t i = 0; i < n; ++i )
        tick.transitions.push_back( { tick.states[ i ], tick.states[ ( i + 1 ) % n ], std::nullopt,
                                      SyncAction{ sedm_channel( i ), SyncDir::Send, std::nullopt, std::nullopt }, {} } );
    m.processes.push_back( std::move( tick ) );

    for ( std::size_t i = 0; i < n; ++i )
    {
        const auto& p = sk.processes[ i ];
        std::set< std::string > local_names = taken;
        for ( const auto& v : p.locals )
            local_names.insert( v.name );
        Process out;
        out.name = p.name;
        out.locals = p.locals;
        if ( sk.emits_now() )
            out.locals.push_back( { "now", 0 } );
        for ( const auto& t : p.timers )
        {
            const auto names = naming( p, t );
            detail::check_fresh( local_names, names.ub );
            detail::check_fresh( local_names, names.lb );
            out.locals.push_back( { names.ub, cfg.infinity } );
            out.locals.push_back( { names.lb, 0 } );
        }
        out.states = p.locations;
        out.init = p.init;

        std::vector< Assignment > tick_effects;
        if ( sk.emits_now() )
            tick_effects.push_back( { "now", detail::now_step( cfg.maximal ) } );
        for ( auto& a : detail::timer_decrements( p, naming, cfg.infinity ) )
            tick_effects.push_back( std::move( a ) );
        auto hard = detail::hard_ub_positive( p, naming );
        for ( const auto& loc : p.locations )
        {
            Transition self{ loc, loc, std::nullopt,
                             SyncAction{ sedm_channel( i ), SyncDir::Receive, std::nullopt, std::nullopt }, tick_effects };
            if ( !hard.empty() )
                self.guard = expr::conjunction( hard );
            out.transitions.push_back( std::move( self ) );
        }
        for ( const auto& e : p.edges )
            out.transitions.push_back( detail::lower_edge( p, e, naming, cfg.infinity ) );
        m.processes.push_back( std::move( out ) );
    }
    return m;
}

inline Model generate( const TimedSkeleton& sk, Method method )
{
    return method == Method::LEDM ? gen_ledm( sk ) : gen_sedm( sk );
}

// ---------------------------------------------------------------------------
// Deprivable resource

// `n_low` tasks Low1..LowN competing for a resource, each needing `exec_ticks`
// ticks of execution, and one task High that seizes the resource whenever it
// likes for `high_ticks` ticks. A deprived task stores its remaining time and
// resumes with it once the resource is free again.
inline TimedSkeleton preemptive_skeleton( std::size_t n_low, std::int64_t exec_ticks, std::int64_t high_ticks = 2 )
{
    if ( exec_ticks < 1 || high_ticks < 1 )
        throw ValidationError( "execution times must be at least 1" );
    std::string text = "shared isROccupied = 0\n";
    for ( std::size_t i = 1; i <= n_low; ++i )
    {
        text += "process Low" + std::to_string( i ) + " init s_i\n";
        text += "var Tag = " + std::to_string( i ) + "\n";
        text += "var timeToGo = " + std::to_string( exec_ticks ) + "\n";
        text += "timer ltimer\n";
        text += "edge s_i -> s_Exec set ltimer timeToGo timeToGo guard isROccupied == 0 effect isROccupied = Tag\n";
        text += "edge s_Exec -> s_Next afterdelay ltimer guard isROccupied == Tag effect isROccupied = 0\n";
        text += "edge s_Exec -> s_Deprived guard isROccupied != Tag && ltimer > 0 effect timeToGo = ltimer\n";
        text += "edge s_Deprived -> s_Exec set ltimer timeToGo timeToGo guard isROccupied == 0 effect isROccupied = Tag\n";
    }
    text += "process High init h_i\n";
    text += "var Tag = " + std::to_string( n_low + 1 ) + "\n";
    text += "timer htimer\n";
    text += "edge h_i -> h_Exec set htimer " + std::to_string( high_ticks ) + " " + std::to_string( high_ticks )
            + " effect isROccupied = Tag\n";
    text += "edge h_Exec -> h_Next afterdelay htimer effect isROccupied = 0\n";
    return parse_skeleton( text );
}

// SEDM build of the pattern. A deprived task may not let time pass in s_Exec:
// its tick self-loop there additionally requires owning the resource, so the
// stored remaining time is exact.
inline Model gen_preemptive_demo( std::size_t n_low, std::int64_t exec_ticks )
{
    Model m = gen_sedm( preemptive_skeleton( n_low, exec_ticks ) );
    for ( auto& p : m.processes )
    {
        if ( p.name.rfind( "Low", 0 ) != 0 )
            continue;
        for ( auto& t : p.transitions )
            if ( t.sync && t.src == "s_Exec" && t.dst == "s_Exec" )
            {
                Expr own = expr::binary( Op::Eq, expr::var( "isROccupied" ), expr::var( "Tag" ) );
                t.guard = t.guard ? expr::binary( Op::And, *t.guard, std::move( own ) ) : std::move( own );
            }
    }
    return m;
}

} // namespace tickcheck
