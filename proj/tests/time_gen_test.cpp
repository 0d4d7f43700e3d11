#include "support/skeleton_corpus.hpp"
#include "support/timed_words.hpp"

#include "tickcheck/dve.hpp"
#include "tickcheck/explorer.hpp"
#include "tickcheck/time_gen.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace tickcheck;
using oracle::TimedEvent;
using oracle::TimedWord;

namespace
{

// Words of the window skeleton worked out by hand: S fires at some s < H (or not
// at all), then A fires at s + d for d in [lb, ub]. If s + ub >= H the run may
// reach the horizon with A still pending.
std::set< TimedWord > expected_window_words( std::size_t lb, std::size_t ub, std::size_t horizon )
{
    std::set< TimedWord > out;
    out.insert( TimedWord{} );
    for ( std::size_t s = 0; s < horizon; ++s )
    {
        const TimedEvent set_ev{ "P", "idle", "wait", s };
        if ( s + ub >= horizon )
            out.insert( TimedWord{ { set_ev }, false } );
        for ( std::size_t d = lb; d <= ub && s + d < horizon; ++d )
            out.insert( TimedWord{ { set_ev, { "P", "wait", "done", s + d } }, false } );
    }
    return out;
}

ExecChoice only_solo( const CompiledModel& m, const StateVector& s, const std::string& proc, const std::string& src,
                      const std::string& dst )
{
    const auto& model = m.model();
    std::optional< ExecChoice > found;
    for ( const auto& c : enabled_choices( m, s ) )
    {
        if ( c.is_rendezvous() )
            continue;
        const auto& p = model.processes[ c.primary.process ];
        const auto& t = p.transitions[ c.primary.transition ];
        if ( p.name == proc && t.src == src && t.dst == dst )
        {
            EXPECT_FALSE( found ) << "ambiguous step";
            found = c;
        }
    }
    if ( !found )
        throw std::runtime_error( proc + " " + src + " -> " + dst + " not enabled" );
    return *found;
}

bool solo_enabled( const CompiledModel& m, const StateVector& s, const std::string& proc, const std::string& src,
                   const std::string& dst )
{
    try
    {
        only_solo( m, s, proc, src, dst );
        return true;
    }
    catch ( const std::runtime_error& )
    {
        return false;
    }
}

std::size_t rendezvous_count( const CompiledModel& m, const StateVector& s )
{
    std::size_t n = 0;
    for ( const auto& c : enabled_choices( m, s ) )
        n += c.is_rendezvous();
    return n;
}

// One full SEDM tick cycle; throws when some process refuses its sync.
StateVector tick_cycle( const CompiledModel& m, StateVector s )
{
    const std::size_t n = m.model().channels.size();
    for ( std::size_t i = 0; i < n; ++i )
    {
        std::optional< ExecChoice > sync;
        for ( const auto& c : enabled_choices( m, s ) )
            if ( c.is_rendezvous() )
                sync = c;
        if ( !sync )
            throw std::runtime_error( "tick cycle blocked" );
        s = apply_choice( m, s, *sync );
    }
    return s;
}

} // namespace

// ---------------------------------------------------------------------------
// Skeleton parsing

TEST( Skeleton, WindowPatternParses )
{
    const auto sk = parse_skeleton( corpus::window( 1, 2 ) );
    ASSERT_EQ( sk.processes.size(), 1u );
    const auto& p = sk.processes[ 0 ];
    EXPECT_EQ( p.edges.size(), 2u );
    EXPECT_EQ( p.timers, std::vector< std::string >{ "t" } );
    EXPECT_EQ( p.locations, ( std::vector< std::string >{ "idle", "wait", "done" } ) );
    ASSERT_EQ( p.edges[ 0 ].sets.size(), 1u );
    EXPECT_EQ( p.edges[ 0 ].sets[ 0 ].lb, expr::lit( 1 ) );
    EXPECT_EQ( p.edges[ 0 ].sets[ 0 ].ub, expr::lit( 2 ) );
    EXPECT_EQ( p.edges[ 1 ].trigger, Trigger::Within );
}

TEST( Skeleton, FixedDelayWithCompetingWindowsParses )
{
    const auto sk = parse_skeleton( corpus::fixed_delay_windows );
    const auto& p = sk.processes.at( 0 );
    EXPECT_EQ( p.timers.size(), 3u );
    EXPECT_EQ( p.edges.size(), 5u );
    EXPECT_TRUE( p.is_hard( "fixdelay" ) );
    EXPECT_FALSE( p.is_hard( "t1" ) );
    EXPECT_TRUE( p.is_hard( "t2" ) );
    EXPECT_EQ( p.consumed_at( "racing" ), ( std::vector< std::string >{ "t1", "t2" } ) );
}

TEST( Skeleton, InfiniteUpperBoundAndComments )
{
    const auto sk = parse_skeleton( "# header\nprocess P init a # trailing\ntimer t\nedge a -> b set t 2 inf\n" );
    EXPECT_FALSE( sk.processes[ 0 ].edges[ 0 ].sets[ 0 ].ub.has_value() );
}

TEST( Skeleton, RenderRoundTrip )
{
    for ( const auto& [ name, sk ] : corpus::skeletons() )
        EXPECT_EQ( parse_skeleton( render_skeleton( sk ) ), sk ) << name;
}

TEST( Skeleton, LowerAboveUpperRejected )
{
    EXPECT_THROW( parse_skeleton( "process P init a\ntimer t\nedge a -> b set t 3 2\nedge b -> c within t\n" ),
                  ValidationError );
}

TEST( Skeleton, FixedDelayNeedsEqualBounds )
{
    EXPECT_THROW( parse_skeleton( "process P init a\ntimer t\nedge a -> b set t 1 2\nedge b -> c afterdelay t\n" ),
                  ValidationError );
    EXPECT_NO_THROW( parse_skeleton( "process P init a\ntimer t\nedge a -> b set t 2 2\nedge b -> c afterdelay t\n" ) );
}

TEST( Skeleton, TimerReferencesChecked )
{
    EXPECT_THROW( parse_skeleton( "process P init a\nedge a -> b within t\n" ), ValidationError );
    EXPECT_THROW( parse_skeleton( "process P init a\ntimer t\nedge a -> b within t\n" ), ValidationError );
    EXPECT_THROW( parse_skeleton( "process P init a\nedge a -> b set u 1 1\n" ), ValidationError );
    EXPECT_THROW( parse_skeleton( "process P init a\nedge a -> b guard y == 0\n" ), ValidationError );
    EXPECT_THROW( parse_skeleton( "process P init a\ntimer t\nedge a -> b set t 1 1 effect t = 0\n" ), ValidationError );
}

TEST( Skeleton, MalformedTextRejected )
{
    EXPECT_THROW( parse_skeleton( "timer t\n" ), ParseError );
    EXPECT_THROW( parse_skeleton( "process P init a\nedge a b\n" ), ParseError );
    EXPECT_THROW( parse_skeleton( "process P init a\nfoo\n" ), ParseError );
    try
    {
        parse_skeleton( "process P init a\n\nedge a -> b guard\n" );
        FAIL();
    }
    catch ( const ParseError& e )
    {
        EXPECT_EQ( e.pos().line, 3u );
    }
}

TEST( Skeleton, DisabledClockCannotBeRead )
{
    auto sk = parse_skeleton( "process P init a\nedge a -> b guard now == 0\n" );
    EXPECT_TRUE( sk.emits_now() );
    sk.config.emit_now = false;
    EXPECT_THROW( gen_ledm( sk ), ValidationError );
    EXPECT_THROW( gen_sedm( sk ), ValidationError );
}

// ---------------------------------------------------------------------------
// LEDM

TEST( Ledm, WindowShape )
{
    const Model m = gen_ledm( parse_skeleton( corpus::window( 1, 2 ) ) );
    EXPECT_EQ( m.globals, ( std::vector< VarDecl >{ { "ub_P_t", 65535 }, { "lb_P_t", 0 } } ) );
    ASSERT_EQ( m.processes.size(), 2u );
    const auto& tick = m.processes[ 0 ];
    EXPECT_EQ( tick.name, "Tick" );
    ASSERT_EQ( tick.transitions.size(), 1u );
    EXPECT_EQ( detail::render_transition( tick.transitions[ 0 ] ),
               "tick -> tick { guard ub_P_t > 0; effect ub_P_t = ub_P_t - (ub_P_t != 65535), "
               "lb_P_t = lb_P_t - (lb_P_t != 0); }" );
    const auto& p = m.processes[ 1 ];
    EXPECT_EQ( detail::render_transition( p.transitions[ 0 ] ), "idle -> wait { effect ub_P_t = 2, lb_P_t = 1; }" );
    EXPECT_EQ( detail::render_transition( p.transitions[ 1 ] ),
               "wait -> done { guard lb_P_t == 0; effect ub_P_t = 65535, lb_P_t = 0; }" );
    EXPECT_NO_THROW( CompiledModel{ m } );
}

TEST( Ledm, InWindowGuardAndSoftDecrement )
{
    const Model m = gen_ledm( parse_skeleton( corpus::fixed_delay_windows ) );
    const auto& p = m.processes[ 1 ];
    EXPECT_EQ( detail::render_transition( p.transitions[ 2 ] ),
               "racing -> first { guard ub_P_t1 > 0 && lb_P_t1 == 0; effect ub_P_t1 = 65535, lb_P_t1 = 0, "
               "ub_P_t2 = 65535, lb_P_t2 = 0; }" );
    const auto tick = detail::render_transition( m.processes[ 0 ].transitions[ 0 ] );
    EXPECT_NE( tick.find( "guard ub_P_fixdelay > 0 && ub_P_t2 > 0;" ), std::string::npos ) << tick;
    EXPECT_NE( tick.find( "ub_P_t1 = ub_P_t1 - (ub_P_t1 != 65535 && ub_P_t1 != 0)" ), std::string::npos ) << tick;
}

TEST( Ledm, ZeroTimersTickAlwaysEnabled )
{
    const Model m = gen_ledm( parse_skeleton( "process P init a\nedge a -> b\n" ) );
    EXPECT_FALSE( m.processes[ 0 ].transitions[ 0 ].guard.has_value() );
    EXPECT_TRUE( m.processes[ 0 ].transitions[ 0 ].effects.empty() );
    const auto report = explore_reachable( CompiledModel( m ) );
    EXPECT_EQ( report.deadlock_states, 0u );
    EXPECT_EQ( report.state_count, 2u );
}

TEST( Ledm, TimeStopsAtUpperBound )
{
    const CompiledModel m( gen_ledm( parse_skeleton( corpus::window( 1, 2 ) ) ) );
    StateVector s = apply_choice( m, m.initial_state(), only_solo( m, m.initial_state(), "P", "idle", "wait" ) );
    const auto tick = only_solo( m, s, "Tick", "tick", "tick" );
    EXPECT_FALSE( solo_enabled( m, s, "P", "wait", "done" ) );
    s = apply_choice( m, s, tick );
    EXPECT_TRUE( solo_enabled( m, s, "P", "wait", "done" ) );
    s = apply_choice( m, s, tick );
    EXPECT_EQ( s[ m.global_slot( "ub_P_t" ) ], 0 );
    EXPECT_FALSE( solo_enabled( m, s, "Tick", "tick", "tick" ) );
    EXPECT_EQ( enabled_choices( m, s ).size(), 1u );
}

TEST( Ledm, ClockWrapsAtMaximal )
{
    for ( std::int64_t maximal : { 2, 7, 65535, 65536 } )
    {
        auto sk = parse_skeleton( "process P init a\nedge a -> b guard now == 1\n" );
        sk.config.maximal = maximal;
        const CompiledModel m( gen_ledm( sk ) );
        StateVector s = m.initial_state();
        s.slots()[ m.global_slot( "now" ) ] = static_cast< std::uint16_t >( maximal - 1 );
        const auto next = apply_choice( m, s, only_solo( m, s, "Tick", "tick", "tick" ) );
        EXPECT_EQ( next[ m.global_slot( "now" ) ], 0 ) << maximal;
    }
}

TEST( Ledm, ClockOmittedWhenUnread )
{
    const Model m = gen_ledm( parse_skeleton( corpus::window( 1, 2 ) ) );
    EXPECT_FALSE( m.has_global( "now" ) );
    auto sk = parse_skeleton( corpus::window( 1, 2 ) );
    sk.config.emit_now = true;
    EXPECT_TRUE( gen_ledm( sk ).has_global( "now" ) );
}

TEST( Ledm, GeneratedNameClashRejected )
{
    EXPECT_THROW( gen_ledm( parse_skeleton( "process Tick init a\n" ) ), ValidationError );
    EXPECT_THROW( gen_ledm( parse_skeleton( "shared ub_P_t = 0\nprocess P init a\ntimer t\nedge a -> b set t 1 1\n" ) ),
                  ValidationError );
}

// ---------------------------------------------------------------------------
// SEDM

TEST( Sedm, TickCycleShape )
{
    const Model m = gen_sedm( parse_skeleton( "process A init idle\nprocess B init idle\n" ) );
    ASSERT_EQ( m.channels.size(), 2u );
    const auto& tick = m.processes[ 0 ];
    EXPECT_EQ( tick.name, "P_Tick" );
    EXPECT_EQ( tick.states, ( std::vector< std::string >{ "tick1", "tick2" } ) );
    ASSERT_EQ( tick.transitions.size(), 2u );
    EXPECT_EQ( detail::render_transition( tick.transitions[ 0 ] ), "tick1 -> tick2 { sync chan1!; }" );
    EXPECT_EQ( detail::render_transition( tick.transitions[ 1 ] ), "tick2 -> tick1 { sync chan2!; }" );
    EXPECT_EQ( detail::render_transition( m.processes[ 1 ].transitions[ 0 ] ), "idle -> idle { sync chan1?; }" );
    EXPECT_EQ( detail::render_transition( m.processes[ 2 ].transitions[ 0 ] ), "idle -> idle { sync chan2?; }" );
}

TEST( Sedm, TimersAreLocal )
{
    const Model m = gen_sedm( parse_skeleton( corpus::window( 1, 2 ) ) );
    EXPECT_TRUE( m.globals.empty() );
    EXPECT_EQ( m.processes[ 1 ].locals, ( std::vector< VarDecl >{ { "ub_t", 65535 }, { "lb_t", 0 } } ) );
    EXPECT_EQ( detail::render_transition( m.processes[ 1 ].transitions[ 1 ] ),
               "wait -> wait { guard ub_t > 0; sync chan1?; effect ub_t = ub_t - (ub_t != 65535), lb_t = lb_t - (lb_t != 0); }" );
}

TEST( Sedm, StarvationEnforcesUpperBound )
{
    const CompiledModel m( gen_sedm( parse_skeleton( corpus::window( 1, 2 ) ) ) );
    StateVector s = apply_choice( m, m.initial_state(), only_solo( m, m.initial_state(), "P", "idle", "wait" ) );
    s = tick_cycle( m, tick_cycle( m, s ) );
    EXPECT_EQ( m.value( s, "P", "ub_t" ), 0 );
    EXPECT_EQ( rendezvous_count( m, s ), 0u );
    EXPECT_THROW( tick_cycle( m, s ), std::runtime_error );
    s = apply_choice( m, s, only_solo( m, s, "P", "wait", "done" ) );
    EXPECT_EQ( rendezvous_count( m, s ), 1u );
}

TEST( Sedm, RoundRobinOrder )
{
    for ( const auto& [ name, sk ] : corpus::skeletons() )
    {
        const CompiledModel m( gen_sedm( sk ) );
        const auto tick_loc = m.process( 0 ).location_slot;
        explore_reachable( m, {}, [ & ]( const StateVector& from, const ExecChoice& c, const StateVector& to ) {
            if ( !c.is_rendezvous() )
            {
                EXPECT_EQ( from[ tick_loc ], to[ tick_loc ] ) << name;
                return;
            }
            EXPECT_EQ( c.primary.process, 0u ) << name;
            EXPECT_EQ( c.receiver->process, from[ tick_loc ] + 1u ) << name;
            EXPECT_EQ( to[ tick_loc ], ( from[ tick_loc ] + 1u ) % sk.processes.size() ) << name;
        } );
    }
}

// ---------------------------------------------------------------------------
// Timing semantics of both encodings

class BothEncodings : public ::testing::TestWithParam< Method >
{
};

TEST_P( BothEncodings, WindowWordsMatchHandDerivation )
{
    for ( std::size_t lb = 0; lb <= 3; ++lb )
        for ( std::size_t ub = std::max< std::size_t >( lb, 1 ); ub <= 3; ++ub )
        {
            const auto sk = parse_skeleton( corpus::window( static_cast< int >( lb ), static_cast< int >( ub ) ) );
            const auto words = oracle::timed_words( generate( sk, GetParam() ), GetParam(), 5 );
            EXPECT_EQ( words, expected_window_words( lb, ub, 5 ) ) << lb << "," << ub;
        }
}

TEST_P( BothEncodings, TimerPairsStayOrdered )
{
    for ( const auto& [ name, sk ] : corpus::skeletons() )
    {
        const CompiledModel m( generate( sk, GetParam() ) );
        std::vector< std::pair< std::size_t, std::size_t > > pairs;
        for ( const auto& p : sk.processes )
            for ( const auto& t : p.timers )
                pairs.emplace_back( GetParam() == Method::LEDM ? m.global_slot( "ub_" + p.name + "_" + t )
                                                               : m.slot( p.name, "ub_" + t ),
                                    GetParam() == Method::LEDM ? m.global_slot( "lb_" + p.name + "_" + t )
                                                               : m.slot( p.name, "lb_" + t ) );
        // overflow would surface as an exception during exploration
        explore_reachable( m, {}, [ & ]( const StateVector&, const ExecChoice&, const StateVector& to ) {
            for ( const auto& [ ub, lb ] : pairs )
                EXPECT_GE( to[ ub ], to[ lb ] ) << name;
        } );
    }
}

TEST_P( BothEncodings, PreemptionSkeletonExplores )
{
    const auto report = explore_reachable( CompiledModel( generate( preemptive_skeleton( 2, 3 ), GetParam() ) ) );
    EXPECT_GT( report.state_count, 10u );
}

INSTANTIATE_TEST_SUITE_P( Encodings, BothEncodings, ::testing::Values( Method::LEDM, Method::SEDM ),
                          []( const auto& info ) { return std::string( method_name( info.param ) ); } );

// Single-process skeletons and two-process skeletons that share nothing.
TEST( Equivalence, IndependentProcessesAgree )
{
    const std::set< std::string > interacting = { "handshake", "preemption" };
    for ( const auto& [ name, sk ] : corpus::skeletons() )
    {
        if ( interacting.count( name ) )
            continue;
        for ( std::size_t horizon : { 3u, 5u } )
            EXPECT_EQ( oracle::timed_words( gen_ledm( sk ), Method::LEDM, horizon ),
                       oracle::timed_words( gen_sedm( sk ), Method::SEDM, horizon ) )
                << name << " H=" << horizon;
    }
}

// chan1 is served before chan2 in every cycle, so P can write a shared variable
// at its local time 1 while Q still stands at local time 0 and reacts to it.
TEST( Equivalence, SharedVariableSeesRunAhead )
{
    const auto sk = parse_skeleton( R"(
shared flag = 0
process P init a
timer t
edge a -> b set t 1 1
edge b -> c afterdelay t effect flag = 1
process Q init a
edge a -> b guard flag == 1
)" );
    const TimedWord skewed{ { { "P", "a", "b", 0 }, { "Q", "a", "b", 0 }, { "P", "b", "c", 1 } }, false };
    EXPECT_FALSE( oracle::timed_words( gen_ledm( sk ), Method::LEDM, 3 ).count( skewed ) );
    EXPECT_TRUE( oracle::timed_words( gen_sedm( sk ), Method::SEDM, 3 ).count( skewed ) );
}

// ---------------------------------------------------------------------------
// Deprivable resource

TEST( Preemption, PatternShape )
{
    const auto sk = preemptive_skeleton( 1, 10 );
    ASSERT_EQ( sk.processes.size(), 2u );
    EXPECT_EQ( sk.processes[ 0 ].locations,
               ( std::vector< std::string >{ "s_i", "s_Exec", "s_Next", "s_Deprived" } ) );
    EXPECT_EQ( sk.shared, ( std::vector< VarDecl >{ { "isROccupied", 0 } } ) );
    EXPECT_THROW( preemptive_skeleton( 1, 0 ), ValidationError );
}

TEST( Preemption, AcquireLoadsRemainingTime )
{
    const CompiledModel m( gen_preemptive_demo( 1, 10 ) );
    const auto s = apply_choice( m, m.initial_state(), only_solo( m, m.initial_state(), "Low1", "s_i", "s_Exec" ) );
    EXPECT_EQ( m.value( s, "Low1", "ub_ltimer" ), 10 );
    EXPECT_EQ( m.value( s, "Low1", "lb_ltimer" ), 10 );
    EXPECT_EQ( m.value( s, "Low1", "isROccupied" ), 1 );
}

TEST( Preemption, UninterruptedRunTakesExecTicks )
{
    for ( std::int64_t exec : { 1, 4, 10 } )
    {
        const CompiledModel m( gen_preemptive_demo( 1, exec ) );
        StateVector s = apply_choice( m, m.initial_state(), only_solo( m, m.initial_state(), "Low1", "s_i", "s_Exec" ) );
        std::int64_t ticks = 0;
        while ( !solo_enabled( m, s, "Low1", "s_Exec", "s_Next" ) )
        {
            s = tick_cycle( m, s );
            ++ticks;
        }
        EXPECT_EQ( ticks, exec );
        s = apply_choice( m, s, only_solo( m, s, "Low1", "s_Exec", "s_Next" ) );
        EXPECT_EQ( m.value( s, "Low1", "isROccupied" ), 0 );
    }
}

TEST( Preemption, DeprivedTaskResumesWithRemainder )
{
    const CompiledModel m( gen_preemptive_demo( 1, 10 ) );
    StateVector s = apply_choice( m, m.initial_state(), only_solo( m, m.initial_state(), "Low1", "s_i", "s_Exec" ) );
    for ( int i = 0; i < 3; ++i )
        s = tick_cycle( m, s );
    s = apply_choice( m, s, only_solo( m, s, "High", "h_i", "h_Exec" ) );
    EXPECT_THROW( tick_cycle( m, s ), std::runtime_error ); // no time passes until Low1 yields
    s = apply_choice( m, s, only_solo( m, s, "Low1", "s_Exec", "s_Deprived" ) );
    EXPECT_EQ( m.value( s, "Low1", "timeToGo" ), 7 );
    while ( !solo_enabled( m, s, "High", "h_Exec", "h_Next" ) )
        s = tick_cycle( m, s );
    s = apply_choice( m, s, only_solo( m, s, "High", "h_Exec", "h_Next" ) );
    s = apply_choice( m, s, only_solo( m, s, "Low1", "s_Deprived", "s_Exec" ) );
    EXPECT_EQ( m.value( s, "Low1", "ub_ltimer" ), 7 );
    int further = 0;
    while ( !solo_enabled( m, s, "Low1", "s_Exec", "s_Next" ) )
    {
        s = tick_cycle( m, s );
        ++further;
    }
    EXPECT_EQ( further, 7 );
    EXPECT_EQ( 3 + further, 10 );
}
