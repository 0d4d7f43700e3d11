#include <gtest/gtest.h>

#include "support/ltl_oracle.hpp"
#include "support/random_models.hpp"
#include "tickcheck/dve.hpp"
#include "tickcheck/ltl_check.hpp"

#include <random>

using namespace tickcheck;

namespace
{

CompiledModel compile( const char* text ) { return CompiledModel( parse_model( text ) ); }

// c counts up to 3 and stays there.
constexpr const char* counter = R"(
int c;
process P {
    state run, done;
    init run;
    trans
        run -> run { guard c < 3; effect c = c + 1; },
        run -> done { guard c == 3; };
}
)";

} // namespace

TEST( ParseLtl, GloballyOfComparison )
{
    EXPECT_EQ( parse_ltl( "G (c<2)" ), ltl::globally( ltl::atom( "c < 2" ) ) );
    EXPECT_EQ( parse_ltl( "true" ), ltl::tt() );
    EXPECT_EQ( parse_ltl( "(x + 1) < 2" ), ltl::atom( "(x + 1) < 2" ) );
}

TEST( ParseLtl, Precedence )
{
    const Formula p = ltl::atom( "p" ), q = ltl::atom( "q" ), r = ltl::atom( "r" );
    EXPECT_EQ( parse_ltl( "!p U q && r" ), ltl::conj( ltl::until( ltl::neg( p ), q ), r ) );
    EXPECT_EQ( parse_ltl( "p || q && r -> p" ), ltl::implies( ltl::disj( p, ltl::conj( q, r ) ), p ) );
    EXPECT_EQ( parse_ltl( "p U q U r" ), ltl::until( p, ltl::until( q, r ) ) );
    EXPECT_EQ( parse_ltl( "G p -> F q" ), ltl::implies( ltl::globally( p ), ltl::finally( q ) ) );
}

TEST( ParseLtl, UnclosedIsError )
{
    EXPECT_THROW( parse_ltl( "G (p U" ), ParseError );
    EXPECT_THROW( parse_ltl( "G (c<" ), ParseError );
    EXPECT_THROW( parse_ltl( "p U" ), ParseError );
    EXPECT_THROW( parse_ltl( "p q" ), ParseError );
}

TEST( ParseLtl, RenderRoundTrip )
{
    std::mt19937 rng( 17 );
    const Model m = parse_model( "int a, b; process P { state s; init s; }" );
    for ( int i = 0; i < 200; ++i )
    {
        Formula f = testing_support::random_formula( rng, m );
        if ( i % 3 == 0 )
            f = ltl::implies( f, testing_support::random_formula( rng, m ) );
        EXPECT_EQ( parse_ltl( render_ltl( f ) ), f ) << render_ltl( f );
    }
}

TEST( Nnf, NegatedComparisonFlips )
{
    EXPECT_EQ( to_nnf( ltl::neg( parse_ltl( "G (c<2)" ) ) ), ltl::finally( ltl::atom( "c >= 2" ) ) );
    EXPECT_EQ( to_nnf( parse_ltl( "!(p U q)" ) ), ltl::release( ltl::neg( ltl::atom( "p" ) ), ltl::neg( ltl::atom( "q" ) ) ) );
}

TEST( ToBuchi, TrueIsOneAcceptingLoop )
{
    const auto b = to_buchi( ltl::tt() );
    ASSERT_EQ( b.size(), 1u );
    EXPECT_TRUE( b.states[ 0 ].accepting );
    ASSERT_EQ( b.states[ 0 ].edges.size(), 1u );
    EXPECT_TRUE( b.states[ 0 ].edges[ 0 ].label.empty() );
    EXPECT_EQ( b.states[ 0 ].edges[ 0 ].target, 0u );
}

TEST( ToBuchi, NegatedSafetyIsWaitAndSink )
{
    const auto b = to_buchi( ltl::neg( parse_ltl( "G (c<2)" ) ) );
    ASSERT_EQ( b.size(), 2u );
    ASSERT_EQ( b.initial, ( std::vector< std::size_t >{ 0 } ) );
    ASSERT_EQ( b.atoms, ( std::vector< Expr >{ parse_expr( "c >= 2" ) } ) );
    const auto& wait = b.states[ 0 ];
    const auto& sink = b.states[ 1 ];
    EXPECT_FALSE( wait.accepting );
    EXPECT_TRUE( sink.accepting );
    ASSERT_EQ( wait.edges.size(), 2u );
    EXPECT_NE( std::find( wait.edges.begin(), wait.edges.end(), BuchiEdge{ {}, 0 } ), wait.edges.end() );
    EXPECT_NE( std::find( wait.edges.begin(), wait.edges.end(), BuchiEdge{ { { 0, true } }, 1 } ), wait.edges.end() );
    EXPECT_EQ( sink.edges, ( std::vector< BuchiEdge >{ { {}, 1 } } ) );
}

TEST( ToBuchi, EventuallyRejectsWordWithoutWitness )
{
    const auto b = to_buchi( parse_ltl( "F p" ) );
    oracle::LassoWord never{ { { { "p", 0 } }, { { "p", 0 } } }, 1 };
    EXPECT_FALSE( oracle::accepts( b, never ) );
    oracle::LassoWord later{ { { { "p", 0 } }, { { "p", 1 } } }, 0 };
    EXPECT_TRUE( oracle::accepts( b, later ) );
}

TEST( ToBuchi, AgreesWithDirectSemanticsOnShortLassos )
{
    for ( const char* text : { "G p", "F p", "p U q", "G (p -> F q)", "X p", "!(G p)", "!(F p)", "!(p U q)",
                               "!(G (p -> F q))", "!(X p)", "G F p", "F G p", "p R q", "X X (p || q)",
                               "(p U q) && G !q", "G (p -> X !p)" } )
    {
        const Formula f = parse_ltl( text );
        const auto b = to_buchi( f );
        std::size_t checked = 0, mismatches = 0;
        oracle::for_each_lasso( { "p", "q" }, 5, [ & ]( const oracle::LassoWord& w ) {
            ++checked;
            if ( oracle::accepts( b, w ) != oracle::satisfies( f, w ) )
                ++mismatches;
        } );
        EXPECT_EQ( mismatches, 0u ) << text;
        EXPECT_GT( checked, 1000u );
    }
}

TEST( ToBuchi, LabelsAreSatisfiable )
{
    for ( const char* text : { "G (p -> F q)", "!(p U q)", "(p U q) && G !q", "G (p && !p)" } )
    {
        for ( const auto& s : to_buchi( parse_ltl( text ) ).states )
            for ( const auto& e : s.edges )
                for ( const auto& lit : e.label )
                    EXPECT_EQ( std::count( e.label.begin(), e.label.end(), BuchiLiteral{ lit.atom, !lit.positive } ), 0 );
    }
}

TEST( Product, InitialStatesReadInitialValuation )
{
    const auto m = compile( counter );
    const Product p( m, to_buchi( parse_ltl( "!(G (c < 2))" ) ) );
    std::vector< Product::Successor > init;
    p.initial_states( init );
    ASSERT_EQ( init.size(), 1u ); // c = 0: only the waiting edge is enabled
    EXPECT_FALSE( p.accepting( init[ 0 ].state ) );
}

TEST( Product, EnteringViolationMayMoveToSink )
{
    const auto m = compile( counter );
    const Product p( m, to_buchi( parse_ltl( "!(G (c < 2))" ) ) );
    ProductState at{ m.initial_state(), 0 };
    at.system.slots()[ m.global_slot( "c" ) ] = 1;
    std::vector< Product::Successor > succ;
    p.successors( at, succ );
    ASSERT_EQ( succ.size(), 2u );
    EXPECT_EQ( m.value( succ[ 0 ].state.system, "", "c" ), 2 );
    bool to_sink = false;
    for ( const auto& s : succ )
        to_sink = to_sink || p.accepting( s.state );
    EXPECT_TRUE( to_sink );

    // From c = 0 the entered state has c = 1, so the sink edge is filtered out.
    at.system.slots()[ m.global_slot( "c" ) ] = 0;
    p.successors( at, succ );
    ASSERT_EQ( succ.size(), 1u );
    EXPECT_FALSE( p.accepting( succ[ 0 ].state ) );
}

TEST( Product, DeadlockOnlyStutters )
{
    const auto m = compile( counter );
    const Product p( m, to_buchi( ltl::tt() ) );
    ProductState at{ m.initial_state(), 0 };
    at.system.slots()[ m.global_slot( "c" ) ] = 3;
    at.system.slots()[ m.process( 0 ).location_slot ] = 1;
    std::vector< Product::Successor > succ;
    p.successors( at, succ );
    ASSERT_EQ( succ.size(), 1u );
    EXPECT_FALSE( succ[ 0 ].choice.has_value() );
    EXPECT_EQ( succ[ 0 ].state, at );

    const Product no_stutter( m, to_buchi( ltl::tt() ), false );
    no_stutter.successors( at, succ );
    EXPECT_TRUE( succ.empty() );
}

TEST( Product, AtomsMustBeGlobal )
{
    const auto m = compile( "process P { int l; state s; init s; }" );
    EXPECT_THROW( verify( m, parse_ltl( "G (l < 2)" ), Algorithm::NestedDFS ), ValidationError );
}

TEST( Check, TrueAlwaysHolds )
{
    const auto m = compile( counter );
    EXPECT_TRUE( check_nested_dfs( m, ltl::tt() ).holds );
    EXPECT_TRUE( check_owcty( m, ltl::tt() ).holds );
}

TEST( Check, CounterViolatesSafetyWithReplayableLasso )
{
    const auto m = compile( counter );
    for ( auto algo : { Algorithm::NestedDFS, Algorithm::OWCTY } )
    {
        const auto r = verify( m, parse_ltl( "G (c < 2)" ), algo );
        ASSERT_FALSE( r.verdict.holds );
        ASSERT_TRUE( r.verdict.counterexample.has_value() );
        const Product p( m, to_buchi( ltl::neg( parse_ltl( "G (c < 2)" ) ) ) );
        EXPECT_EQ( replay_lasso( p, *r.verdict.counterexample ), "" );
        bool reached = false;
        for ( const auto& s : r.verdict.counterexample->stem )
            reached = reached || m.value( s.state.system, "", "c" ) >= 2;
        for ( const auto& s : r.verdict.counterexample->cycle )
            reached = reached || m.value( s.state.system, "", "c" ) >= 2;
        EXPECT_TRUE( reached );
        EXPECT_FALSE( render_lasso( m, *r.verdict.counterexample ).empty() );
    }
    EXPECT_TRUE( check_nested_dfs( m, parse_ltl( "G (c < 4)" ) ).holds );
    EXPECT_TRUE( check_owcty( m, parse_ltl( "F G (c == 3)" ) ).holds );
}

TEST( Check, SmallestAcceptingCycle )
{
    const auto m = compile( "process P { state s; init s; }" );
    const Product p( m, to_buchi( ltl::tt() ) );
    const auto ndfs = check_nested_dfs( p );
    const auto owcty = check_owcty( p );
    EXPECT_EQ( ndfs.stats.states, 1u );
    EXPECT_EQ( owcty.stats.states, 1u );
    EXPECT_FALSE( ndfs.verdict.holds );
    EXPECT_FALSE( owcty.verdict.holds );
    EXPECT_EQ( replay_lasso( p, *ndfs.verdict.counterexample ), "" );
    EXPECT_EQ( replay_lasso( p, *owcty.verdict.counterexample ), "" );
}

TEST( Check, AcyclicProductHolds )
{
    const auto m = compile( "process P { state a, b, c; init a; trans a -> b {}, b -> c {}; }" );
    const Product p( m, to_buchi( ltl::tt() ), false );
    EXPECT_TRUE( check_nested_dfs( p ).verdict.holds );
    EXPECT_TRUE( check_owcty( p ).verdict.holds );
}

TEST( Check, LimitExceeded )
{
    const auto m = compile( "int x; process P { state a; init a; trans a -> a { guard x < 500; effect x = x + 1; }; }" );
    CheckOptions opts;
    opts.max_states = 50;
    EXPECT_THROW( verify( m, parse_ltl( "G (x < 1000)" ), Algorithm::NestedDFS, opts ), LimitExceeded );
    EXPECT_THROW( verify( m, parse_ltl( "G (x < 1000)" ), Algorithm::OWCTY, opts ), LimitExceeded );
}

TEST( Check, ProductCoversSystemStates )
{
    const auto m = compile( counter );
    const auto sys = explore_reachable( m ).state_count;
    for ( auto algo : { Algorithm::NestedDFS, Algorithm::OWCTY } )
        EXPECT_GE( verify( m, parse_ltl( "G (c < 4)" ), algo ).stats.states, sys );
}

TEST( Check, AlgorithmsAgreeOnRandomModels )
{
    std::mt19937 rng( 1234 );
    std::size_t violated = 0;
    for ( int i = 0; i < 150; ++i )
    {
        const Model model = testing_support::random_model( rng, 2 );
        const CompiledModel m( model );
        const Formula f = testing_support::random_formula( rng, model );
        const auto a = verify( m, f, Algorithm::NestedDFS );
        const auto b = verify( m, f, Algorithm::OWCTY );
        ASSERT_EQ( a.verdict.holds, b.verdict.holds ) << render_model( model ) << render_ltl( f );
        if ( !a.verdict.holds )
        {
            ++violated;
            const Product p( m, to_buchi( ltl::neg( f ) ) );
            EXPECT_EQ( replay_lasso( p, *a.verdict.counterexample ), "" );
            EXPECT_EQ( replay_lasso( p, *b.verdict.counterexample ), "" );
        }
    }
    EXPECT_GT( violated, 10u );
    EXPECT_LT( violated, 140u );
}

TEST( Check, StutterDoesNotMatterWithoutDeadlocks )
{
    std::mt19937 rng( 77 );
    int compared = 0;
    for ( int i = 0; i < 200 && compared < 40; ++i )
    {
        const Model model = testing_support::random_model( rng, 2 );
        const CompiledModel m( model );
        if ( explore_reachable( m ).deadlock_states != 0 )
            continue;
        ++compared;
        const Formula f = testing_support::random_formula( rng, model );
        CheckOptions off;
        off.stutter = false;
        EXPECT_EQ( verify( m, f, Algorithm::NestedDFS ).verdict.holds, verify( m, f, Algorithm::NestedDFS, off ).verdict.holds );
    }
    EXPECT_GE( compared, 10 );
}
