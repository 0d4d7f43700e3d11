#pragma once

// LTL model checking over the synchronous product of a model with the Büchi
// automaton of the negated property. Accepting cycles are found by nested DFS or
// by the OWCTY elimination fixpoint; both return a lasso counterexample.

#include "tickcheck/buchi.hpp"
#include "tickcheck/explorer.hpp"
#include "tickcheck/state_store.hpp"

#include <deque>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tickcheck
{

struct ProductState
{
    StateVector system;
    std::size_t automaton = 0;

    friend bool operator==( const ProductState&, const ProductState& ) = default;
};

// One lasso position together with how it was entered: `choice` is the system step,
// or empty for a stutter step on a deadlocked system state (and for the first stem
// position, which is initial).
struct LassoStep
{
    std::optional< ExecChoice > choice;
    ProductState state;

    friend bool operator==( const LassoStep&, const LassoStep& ) = default;
};

// stem[0] is initial; cycle[0] is a successor of stem.back() and cycle.back() equals
// stem.back().
struct Lasso
{
    std::vector< LassoStep > stem;
    std::vector< LassoStep > cycle;
};

struct Verdict
{
    bool holds = true;
    std::optional< Lasso > counterexample;
};

struct ProductStats
{
    std::size_t states = 0;
    std::size_t transitions = 0;
};

enum class Algorithm
{
    NestedDFS,
    OWCTY,
};

inline const char* algorithm_name( Algorithm a ) { return a == Algorithm::NestedDFS ? "ndfs" : "owcty"; }

inline std::optional< Algorithm > parse_algorithm( std::string_view s )
{
    if ( s == "ndfs" || s == "nested-dfs" )
        return Algorithm::NestedDFS;
    if ( s == "owcty" )
        return Algorithm::OWCTY;
    return std::nullopt;
}

struct CheckOptions
{
    std::optional< std::size_t > max_states;
    bool stutter = true; // give deadlocked system states an implicit self-loop
};

struct CheckResult
{
    Verdict verdict;
    ProductStats stats;
};

// The automaton reads the valuation of the system state being entered.
class Product
{
    const CompiledModel& _m;
    BuchiAutomaton _b;
    std::vector< CompiledExpr > _atoms;
    bool _stutter;

public:
    struct Successor
    {
        std::optional< ExecChoice > choice;
        ProductState state;
    };

    Product( const CompiledModel& m, BuchiAutomaton b, bool stutter = true )
            : _m{ m }, _b{ std::move( b ) }, _stutter{ stutter }
    {
        for ( const auto& a : _b.atoms )
            _atoms.push_back( _m.compile_global( a ) );
    }

    [[nodiscard]] const CompiledModel& model() const { return _m; }
    [[nodiscard]] const BuchiAutomaton& automaton() const { return _b; }
    [[nodiscard]] bool accepting( const ProductState& p ) const { return _b.states[ p.automaton ].accepting; }

    [[nodiscard]] bool label_holds( const std::vector< BuchiLiteral >& label, const StateVector& s ) const
    {
        return BuchiAutomaton::label_holds( label, [ & ]( std::size_t a ) { return _atoms[ a ].holds( s.slots() ); } );
    }

    void initial_states( std::vector< Successor >& out ) const
    {
        out.clear();
        const StateVector s0 = _m.initial_state();
        for ( std::size_t q0 : _b.initial )
            for ( const auto& e : _b.states[ q0 ].edges )
                if ( label_holds( e.label, s0 ) )
                    out.push_back( { std::nullopt, { s0, e.target } } );
    }

    // Successors ordered by system choice, then by automaton edge.
    void successors( const ProductState& p, std::vector< Successor >& out ) const
    {
        out.clear();
        std::vector< ExecChoice > choices;
        enabled_choices( _m, p.system, choices );
        const auto& edges = _b.states[ p.automaton ].edges;
        auto add = [ & ]( const std::optional< ExecChoice >& c, const StateVector& s ) {
            for ( const auto& e : edges )
                if ( label_holds( e.label, s ) )
                    out.push_back( { c, { s, e.target } } );
        };
        if ( choices.empty() )
        {
            if ( _stutter )
                add( std::nullopt, p.system );
            return;
        }
        StateVector next;
        for ( const auto& c : choices )
        {
            apply_choice( _m, p.system, c, next );
            add( c, next );
        }
    }

    [[nodiscard]] std::vector< std::uint16_t > encode( const ProductState& p ) const
    {
        std::vector< std::uint16_t > out( p.system.slots().begin(), p.system.slots().end() );
        out.push_back( static_cast< std::uint16_t >( p.automaton ) );
        return out;
    }

    [[nodiscard]] ProductState decode( std::span< const std::uint16_t > v ) const
    {
        return { StateVector( v.first( v.size() - 1 ) ), v.back() };
    }
};

namespace detail
{

inline BuchiAutomaton negated_property( const Formula& f ) { return to_buchi( ltl::neg( f ) ); }

class ProductStore
{
    const Product& _p;
    StateStore _store;
    std::optional< std::size_t > _limit;

public:
    ProductStore( const Product& p, std::optional< std::size_t > limit )
            : _p{ p }, _store( p.model().width() + 1 ), _limit{ limit }
    {
    }

    std::pair< StateStore::Id, bool > insert( const ProductState& s )
    {
        const auto enc = _p.encode( s );
        auto r = _store.insert( enc );
        if ( r.second && _limit && _store.size() > *_limit )
            throw LimitExceeded( _store.size() - 1 );
        return r;
    }

    [[nodiscard]] ProductState get( StateStore::Id id ) const { return _p.decode( _store.get( id ) ); }
    [[nodiscard]] std::size_t size() const { return _store.size(); }
};

} // namespace detail

// ---------------------------------------------------------------------------
// Nested depth-first search

// Two-phase search: the outer DFS starts an inner DFS from every accepting state
// in postorder; the inner DFS reports a cycle as soon as it touches a state on the
// outer stack. Inner-visited marks are shared across inner searches.
inline CheckResult check_nested_dfs( const Product& p, const CheckOptions& opts = {} )
{
    CheckResult res;
    detail::ProductStore store( p, opts.max_states );
    std::vector< char > on_stack, inner_seen;
    auto grow = [ & ]( std::size_t id ) {
        if ( id >= on_stack.size() )
        {
            on_stack.resize( id + 1, 0 );
            inner_seen.resize( id + 1, 0 );
        }
    };

    struct Frame
    {
        StateStore::Id id;
        std::optional< ExecChoice > choice;
        std::vector< Product::Successor > succ;
        std::size_t next = 0;
    };

    std::vector< Product::Successor > inits;
    p.initial_states( inits );

    std::vector< Frame > outer, inner;
    for ( auto& init : inits )
    {
        auto [ iid, fresh ] = store.insert( init.state );
        grow( iid );
        if ( !fresh )
            continue;
        outer.push_back( { iid, std::nullopt, {}, 0 } );
        p.successors( init.state, outer.back().succ );
        on_stack[ iid ] = 1;

        while ( !outer.empty() )
        {
            Frame& top = outer.back();
            if ( top.next < top.succ.size() )
            {
                auto& s = top.succ[ top.next++ ];
                ++res.stats.transitions;
                auto [ id, inserted ] = store.insert( s.state );
                grow( id );
                if ( inserted )
                {
                    Frame f{ id, s.choice, {}, 0 };
                    p.successors( s.state, f.succ );
                    on_stack[ id ] = 1;
                    outer.push_back( std::move( f ) );
                }
                continue;
            }

            const ProductState seed = store.get( top.id );
            if ( p.accepting( seed ) )
            {
                inner.clear();
                inner.push_back( { top.id, std::nullopt, {}, 0 } );
                p.successors( seed, inner.back().succ );
                while ( !inner.empty() )
                {
                    Frame& it = inner.back();
                    if ( it.next >= it.succ.size() )
                    {
                        inner.pop_back();
                        continue;
                    }
                    auto& s = it.succ[ it.next++ ];
                    ++res.stats.transitions;
                    auto [ id, inserted ] = store.insert( s.state );
                    grow( id );
                    if ( on_stack[ id ] )
                    {
                        // Cycle: outer stack from the hit state to the seed, then the inner path back.
                        Lasso lasso;
                        std::size_t hit = 0;
                        while ( outer[ hit ].id != id )
                            ++hit;
                        for ( std::size_t i = 0; i <= hit; ++i )
                            lasso.stem.push_back( { outer[ i ].choice, store.get( outer[ i ].id ) } );
                        for ( std::size_t i = hit + 1; i < outer.size(); ++i )
                            lasso.cycle.push_back( { outer[ i ].choice, store.get( outer[ i ].id ) } );
                        for ( std::size_t i = 1; i < inner.size(); ++i )
                            lasso.cycle.push_back( { inner[ i ].choice, store.get( inner[ i ].id ) } );
                        lasso.cycle.push_back( { s.choice, s.state } );
                        res.verdict = { false, std::move( lasso ) };
                        res.stats.states = store.size();
                        return res;
                    }
                    if ( !inner_seen[ id ] )
                    {
                        inner_seen[ id ] = 1;
                        Frame f{ id, s.choice, {}, 0 };
                        p.successors( s.state, f.succ );
                        inner.push_back( std::move( f ) );
                    }
                }
            }
            on_stack[ top.id ] = 0;
            outer.pop_back();
        }
    }
    res.stats.states = store.size();
    return res;
}

// ---------------------------------------------------------------------------
// OWCTY

// Builds the reachable product graph, then alternates two eliminations until
// nothing changes: keep only states reachable from accepting states of the set,
// and drop states without a predecessor in the set. A nonempty fixpoint holds an
// accepting cycle.
inline CheckResult check_owcty( const Product& p, const CheckOptions& opts = {} )
{
    CheckResult res;
    detail::ProductStore store( p, opts.max_states );
    std::vector< std::vector< StateStore::Id > > succ;
    std::vector< StateStore::Id > parent;
    std::vector< std::optional< ExecChoice > > entered_by;
    std::vector< StateStore::Id > initial_ids;

    std::vector< Product::Successor > buf;
    p.initial_states( buf );
    for ( auto& s : buf )
    {
        auto [ id, fresh ] = store.insert( s.state );
        if ( fresh )
        {
            initial_ids.push_back( id );
            parent.push_back( id );
            entered_by.push_back( std::nullopt );
        }
    }
    for ( StateStore::Id id = 0; id < store.size(); ++id )
    {
        p.successors( store.get( id ), buf );
        std::vector< StateStore::Id > out;
        for ( auto& s : buf )
        {
            ++res.stats.transitions;
            auto [ nid, fresh ] = store.insert( s.state );
            if ( fresh )
            {
                parent.push_back( id );
                entered_by.push_back( s.choice );
            }
            if ( std::find( out.begin(), out.end(), nid ) == out.end() )
                out.push_back( nid );
        }
        succ.push_back( std::move( out ) );
    }
    const std::size_t n = store.size();
    res.stats.states = n;

    std::vector< char > accepting( n ), in_set( n, 1 );
    for ( std::size_t i = 0; i < n; ++i )
        accepting[ i ] = p.accepting( store.get( static_cast< StateStore::Id >( i ) ) );

    std::size_t remaining = n;
    for ( ;; )
    {
        const std::size_t before = remaining;

        // Reachability from accepting states inside the set.
        std::vector< char > reached( n, 0 );
        std::deque< std::size_t > queue;
        for ( std::size_t i = 0; i < n; ++i )
            if ( in_set[ i ] && accepting[ i ] )
            {
                reached[ i ] = 1;
                queue.push_back( i );
            }
        while ( !queue.empty() )
        {
            const auto v = queue.front();
            queue.pop_front();
            for ( auto w : succ[ v ] )
                if ( in_set[ w ] && !reached[ w ] )
                {
                    reached[ w ] = 1;
                    queue.push_back( w );
                }
        }
        remaining = 0;
        for ( std::size_t i = 0; i < n; ++i )
        {
            in_set[ i ] = in_set[ i ] && reached[ i ];
            remaining += in_set[ i ];
        }

        // Elimination of states without predecessors inside the set.
        std::vector< std::size_t > indeg( n, 0 );
        for ( std::size_t v = 0; v < n; ++v )
            if ( in_set[ v ] )
                for ( auto w : succ[ v ] )
                    if ( in_set[ w ] )
                        ++indeg[ w ];
        for ( std::size_t i = 0; i < n; ++i )
            if ( in_set[ i ] && indeg[ i ] == 0 )
                queue.push_back( i );
        while ( !queue.empty() )
        {
            const auto v = queue.front();
            queue.pop_front();
            if ( !in_set[ v ] )
                continue;
            in_set[ v ] = 0;
            --remaining;
            for ( auto w : succ[ v ] )
                if ( in_set[ w ] && --indeg[ w ] == 0 )
                    queue.push_back( w );
        }
        if ( remaining == before || remaining == 0 )
            break;
    }
    if ( remaining == 0 )
        return res;

    // Some accepting state of the fixpoint lies on a cycle inside it.
    auto choice_between = [ & ]( std::size_t from, std::size_t to ) {
        const ProductState target = store.get( static_cast< StateStore::Id >( to ) );
        p.successors( store.get( static_cast< StateStore::Id >( from ) ), buf );
        for ( auto& s : buf )
            if ( s.state == target )
                return LassoStep{ s.choice, target };
        throw std::logic_error( "product edge vanished" );
    };
    for ( std::size_t a = 0; a < n; ++a )
    {
        if ( !in_set[ a ] || !accepting[ a ] )
            continue;
        std::vector< std::optional< std::size_t > > prev( n );
        std::deque< std::size_t > queue;
        bool closed = false;
        for ( auto w : succ[ a ] )
            if ( in_set[ w ] && !prev[ w ] )
            {
                prev[ w ] = a;
                queue.push_back( w );
            }
        while ( !queue.empty() && !closed )
        {
            const auto v = queue.front();
            queue.pop_front();
            if ( v == a )
            {
                closed = true;
                break;
            }
            for ( auto w : succ[ v ] )
                if ( in_set[ w ] && !prev[ w ] )
                {
                    prev[ w ] = v;
                    queue.push_back( w );
                }
        }
        if ( !prev[ a ] )
            continue;

        Lasso lasso;
        std::vector< std::size_t > chain; // a -> chain[0] -> ... -> chain.back() -> a
        for ( std::size_t v = *prev[ a ]; v != a; v = *prev[ v ] )
            chain.push_back( v );
        std::reverse( chain.begin(), chain.end() );
        std::size_t from = a;
        for ( auto v : chain )
        {
            lasso.cycle.push_back( choice_between( from, v ) );
            from = v;
        }
        lasso.cycle.push_back( choice_between( from, a ) );

        std::vector< std::size_t > stem{ a };
        while ( parent[ stem.back() ] != stem.back() )
            stem.push_back( parent[ stem.back() ] );
        std::reverse( stem.begin(), stem.end() );
        lasso.stem.push_back( { std::nullopt, store.get( static_cast< StateStore::Id >( stem[ 0 ] ) ) } );
        for ( std::size_t i = 1; i < stem.size(); ++i )
            lasso.stem.push_back( { entered_by[ stem[ i ] ], store.get( static_cast< StateStore::Id >( stem[ i ] ) ) } );

        res.verdict = { false, std::move( lasso ) };
        return res;
    }
    throw std::logic_error( "OWCTY fixpoint without an accepting cycle" );
}

// ---------------------------------------------------------------------------
// Entry points

inline CheckResult verify( const CompiledModel& m, const Formula& f, Algorithm algo, const CheckOptions& opts = {} )
{
    const Product p( m, detail::negated_property( f ), opts.stutter );
    return algo == Algorithm::NestedDFS ? check_nested_dfs( p, opts ) : check_owcty( p, opts );
}

inline Verdict check_nested_dfs( const CompiledModel& m, const Formula& f, const CheckOptions& opts = {} )
{
    return verify( m, f, Algorithm::NestedDFS, opts ).verdict;
}

inline Verdict check_owcty( const CompiledModel& m, const Formula& f, const CheckOptions& opts = {} )
{
    return verify( m, f, Algorithm::OWCTY, opts ).verdict;
}

// ---------------------------------------------------------------------------
// Counterexample replay and listing

// Re-executes a lasso through enabled_choices/apply_choice and the automaton.
// Returns an empty string if it is a genuine accepting lasso, otherwise the reason.
inline std::string replay_lasso( const Product& p, const Lasso& lasso )
{
    if ( lasso.stem.empty() || lasso.cycle.empty() )
        return "empty stem or cycle";
    std::vector< Product::Successor > buf;
    p.initial_states( buf );
    bool initial_ok = false;
    for ( const auto& s : buf )
        initial_ok = initial_ok || s.state == lasso.stem[ 0 ].state;
    if ( !initial_ok )
        return "stem does not start in an initial product state";

    const auto& m = p.model();
    auto step_ok = [ & ]( const ProductState& from, const LassoStep& step ) -> std::string {
        const auto choices = enabled_choices( m, from.system );
        if ( step.choice )
        {
            if ( std::find( choices.begin(), choices.end(), *step.choice ) == choices.end() )
                return "choice not enabled";
            if ( apply_choice( m, from.system, *step.choice ) != step.state.system )
                return "system state does not match the executed choice";
        }
        else if ( !choices.empty() || step.state.system != from.system )
            return "stutter step on a state that is not deadlocked";
        for ( const auto& e : p.automaton().states.at( from.automaton ).edges )
            if ( e.target == step.state.automaton && p.label_holds( e.label, step.state.system ) )
                return "";
        return "no automaton edge";
    };

    ProductState at = lasso.stem[ 0 ].state;
    std::size_t index = 1;
    for ( ; index < lasso.stem.size(); ++index )
    {
        if ( auto why = step_ok( at, lasso.stem[ index ] ); !why.empty() )
            return "stem step " + std::to_string( index ) + ": " + why;
        at = lasso.stem[ index ].state;
    }
    bool accepting = false;
    for ( std::size_t i = 0; i < lasso.cycle.size(); ++i )
    {
        if ( auto why = step_ok( at, lasso.cycle[ i ] ); !why.empty() )
            return "cycle step " + std::to_string( i ) + ": " + why;
        at = lasso.cycle[ i ].state;
        accepting = accepting || p.accepting( at );
    }
    if ( !( at == lasso.stem.back().state ) )
        return "cycle does not return to its head";
    if ( !accepting )
        return "cycle has no accepting state";
    return "";
}

// Plain-text listing: one line per step with the executed transitions and the
// variables that changed.
inline std::string render_lasso( const CompiledModel& m, const Lasso& lasso )
{
    std::string out;
    const auto& model = m.model();
    auto describe = [ & ]( TransitionRef r ) {
        const auto& proc = model.processes[ r.process ];
        const auto& t = proc.transitions[ r.transition ];
        return proc.name + " " + t.src + "->" + t.dst;
    };
    auto diff = [ & ]( const StateVector& a, const StateVector& b ) {
        std::string d;
        for ( std::size_t i = 0; i < m.width(); ++i )
        {
            if ( a[ i ] == b[ i ] || m.slot_name( i ).ends_with( ".@location" ) )
                continue;
            d += "  " + m.slot_name( i ) + ": " + std::to_string( a[ i ] ) + "->" + std::to_string( b[ i ] );
        }
        return d;
    };

    const StateVector& s0 = lasso.stem[ 0 ].state.system;
    out += "0 initial";
    for ( std::size_t i = 0; i < m.width(); ++i )
        if ( !m.slot_name( i ).ends_with( ".@location" ) )
            out += "  " + m.slot_name( i ) + "=" + std::to_string( s0[ i ] );
    out += "\n";

    std::size_t index = 1;
    const StateVector* prev = &s0;
    auto emit = [ & ]( const LassoStep& step ) {
        out += std::to_string( index++ ) + " ";
        if ( !step.choice )
            out += "(stutter)";
        else
        {
            out += describe( step.choice->primary );
            if ( step.choice->receiver )
                out += " | " + describe( *step.choice->receiver );
        }
        out += diff( *prev, step.state.system ) + "\n";
        prev = &step.state.system;
    };
    for ( std::size_t i = 1; i < lasso.stem.size(); ++i )
        emit( lasso.stem[ i ] );
    out += "-- cycle --\n";
    for ( const auto& step : lasso.cycle )
        emit( step );
    return out;
}

} // namespace tickcheck
