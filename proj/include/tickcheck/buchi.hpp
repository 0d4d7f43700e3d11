#pragma once

// LTL to Büchi translation by tableau expansion.
//
// A formula in negation normal form is expanded into transitions of a generalized
// Büchi automaton whose states are sets of obligations: each transition carries a
// conjunction of literals that must hold now, the obligation set for the next
// position, and the eventualities (U / F subformulas) it leaves pending. The
// result is degeneralized with a level counter so acceptance is on states.
//
// Runs read letters on edges: a word w0 w1 ... is accepted iff there is a path
// q0 -w0-> q1 -w1-> q2 ... from an initial state visiting accepting states
// infinitely often.

#include "tickcheck/ltl.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace tickcheck
{

struct BuchiLiteral
{
    std::size_t atom = 0;
    bool positive = true;

    friend bool operator==( const BuchiLiteral&, const BuchiLiteral& ) = default;
    friend auto operator<=>( const BuchiLiteral&, const BuchiLiteral& ) = default;
};

struct BuchiEdge
{
    std::vector< BuchiLiteral > label; // conjunction; empty means true
    std::size_t target = 0;

    friend bool operator==( const BuchiEdge&, const BuchiEdge& ) = default;
};

struct BuchiState
{
    std::string name; // obligations and level, for diagnostics
    bool accepting = false;
    std::vector< BuchiEdge > edges;
};

struct BuchiAutomaton
{
    std::vector< Expr > atoms;
    std::vector< BuchiState > states;
    std::vector< std::size_t > initial;

    [[nodiscard]] std::size_t size() const { return states.size(); }

    template < typename AtomValue >
    static bool label_holds( const std::vector< BuchiLiteral >& label, AtomValue&& value )
    {
        for ( const auto& lit : label )
            if ( static_cast< bool >( value( lit.atom ) ) != lit.positive )
                return false;
        return true;
    }
};

inline std::string render_label( const BuchiAutomaton& b, const std::vector< BuchiLiteral >& label )
{
    if ( label.empty() )
        return "true";
    std::string out;
    for ( const auto& lit : label )
    {
        if ( !out.empty() )
            out += " && ";
        out += ( lit.positive ? "" : "!" ) + std::string( "(" ) + render( b.atoms[ lit.atom ] ) + ")";
    }
    return out;
}

namespace detail
{

// Subformulas of an NNF formula, hash-consed by their rendering.
class TableauNodes
{
public:
    struct Node
    {
        Formula::Kind kind;
        std::size_t atom = 0; // Atom / Not(Atom)
        std::size_t a = 0, b = 0;
        std::string text;
    };

    std::vector< Node > nodes;
    std::vector< Expr > atoms;
    std::vector< std::size_t > eventualities; // node ids of U / F, in discovery order

    std::size_t intern( const Formula& f )
    {
        using K = Formula::Kind;
        Node n{ f.kind, 0, 0, 0, render_ltl( f ) };
        if ( auto it = _by_text.find( n.text ); it != _by_text.end() )
            return it->second;
        if ( f.kind == K::Atom || f.kind == K::Not )
        {
            const Expr& e = f.kind == K::Atom ? f.atom : f.args[ 0 ].atom;
            auto pos = std::find( atoms.begin(), atoms.end(), e );
            n.atom = static_cast< std::size_t >( pos - atoms.begin() );
            if ( pos == atoms.end() )
                atoms.push_back( e );
        }
        else
        {
            if ( !f.args.empty() )
                n.a = intern( f.args[ 0 ] );
            if ( f.args.size() > 1 )
                n.b = intern( f.args[ 1 ] );
        }
        const std::size_t id = nodes.size();
        nodes.push_back( std::move( n ) );
        _by_text.emplace( nodes.back().text, id );
        if ( f.kind == K::Until || f.kind == K::Finally )
            eventualities.push_back( id );
        return id;
    }

    // X-wrapped obligations are represented by the id of their operand, so nodes
    // for `X G a` need not exist.

private:
    std::map< std::string, std::size_t > _by_text;
};

struct Expansion
{
    std::vector< BuchiLiteral > label;    // sorted
    std::vector< std::size_t > next;      // sorted node ids
    std::vector< std::size_t > pending;   // sorted eventuality node ids left unfulfilled

    friend bool operator==( const Expansion&, const Expansion& ) = default;
};

class Expander
{
    const TableauNodes& _n;
    std::vector< Expansion > _out;

    struct Branch
    {
        std::vector< std::size_t > todo;
        std::set< std::size_t > done;
        std::set< BuchiLiteral > label;
        std::set< std::size_t > next;
        std::set< std::size_t > pending;
    };

    void run( Branch br )
    {
        using K = Formula::Kind;
        while ( !br.todo.empty() )
        {
            const std::size_t id = br.todo.back();
            br.todo.pop_back();
            if ( !br.done.insert( id ).second )
                continue;
            const auto& node = _n.nodes[ id ];
            switch ( node.kind )
            {
            case K::True: break;
            case K::False: return;
            case K::Atom:
            case K::Not:
            {
                const BuchiLiteral lit{ node.atom, node.kind == K::Atom };
                if ( br.label.count( { lit.atom, !lit.positive } ) )
                    return;
                br.label.insert( lit );
                break;
            }
            case K::And:
                br.todo.push_back( node.b );
                br.todo.push_back( node.a );
                break;
            case K::Or:
            {
                Branch alt = br;
                alt.todo.push_back( node.b );
                br.todo.push_back( node.a );
                run( std::move( br ) );
                run( std::move( alt ) );
                return;
            }
            case K::Next: br.next.insert( node.a ); break;
            case K::Globally:
                br.todo.push_back( node.a );
                br.next.insert( id );
                break;
            case K::Finally:
            case K::Until:
            {
                // fulfil now | keep the promise (left operand now, same obligation next)
                Branch later = br;
                br.todo.push_back( node.kind == K::Finally ? node.a : node.b );
                if ( node.kind == K::Until )
                    later.todo.push_back( node.a );
                later.next.insert( id );
                later.pending.insert( id );
                run( std::move( br ) );
                run( std::move( later ) );
                return;
            }
            case K::Release:
            {
                Branch later = br;
                br.todo.push_back( node.b );
                br.todo.push_back( node.a );
                later.todo.push_back( node.b );
                later.next.insert( id );
                run( std::move( br ) );
                run( std::move( later ) );
                return;
            }
            case K::Implies: break; // absent after NNF
            }
        }
        Expansion e{ { br.label.begin(), br.label.end() },
                     { br.next.begin(), br.next.end() },
                     { br.pending.begin(), br.pending.end() } };
        // True obligations carry no information; dropping them keeps `{}` and `{true}` one state.
        std::erase_if( e.next, [ & ]( std::size_t id ) { return _n.nodes[ id ].kind == Formula::Kind::True; } );
        if ( std::find( _out.begin(), _out.end(), e ) == _out.end() )
            _out.push_back( std::move( e ) );
    }

public:
    explicit Expander( const TableauNodes& n ) : _n{ n } {}

    std::vector< Expansion > expand( const std::vector< std::size_t >& obligations )
    {
        _out.clear();
        Branch b;
        b.todo.assign( obligations.rbegin(), obligations.rend() );
        run( std::move( b ) );
        return _out;
    }
};

inline bool subset( const std::vector< std::size_t >& a, const std::vector< std::size_t >& b )
{
    return std::includes( b.begin(), b.end(), a.begin(), a.end() );
}

inline bool subset( const std::vector< BuchiLiteral >& a, const std::vector< BuchiLiteral >& b )
{
    return std::includes( b.begin(), b.end(), a.begin(), a.end() );
}

// Drops an expansion when another one with the same successor obligations has a
// weaker label and leaves no more eventualities pending.
inline void drop_subsumed( std::vector< Expansion >& xs )
{
    std::vector< bool > dead( xs.size(), false );
    for ( std::size_t i = 0; i < xs.size(); ++i )
        for ( std::size_t j = 0; j < xs.size(); ++j )
            if ( i != j && !dead[ j ] && xs[ i ].next == xs[ j ].next && subset( xs[ j ].label, xs[ i ].label )
                 && subset( xs[ j ].pending, xs[ i ].pending ) && !( xs[ i ] == xs[ j ] && i < j ) )
            {
                dead[ i ] = true;
                break;
            }
    std::vector< Expansion > kept;
    for ( std::size_t i = 0; i < xs.size(); ++i )
        if ( !dead[ i ] )
            kept.push_back( std::move( xs[ i ] ) );
    xs = std::move( kept );
}

} // namespace detail

// Büchi automaton accepting exactly the words satisfying `f`.
inline BuchiAutomaton to_buchi( const Formula& f )
{
    detail::TableauNodes nodes;
    const std::size_t root = nodes.intern( to_nnf( f ) );

    // Generalized automaton over obligation sets.
    struct GState
    {
        std::vector< std::size_t > obligations;
        std::vector< detail::Expansion > out;
    };
    std::vector< GState > gstates;
    std::map< std::vector< std::size_t >, std::size_t > gindex;
    detail::Expander expander( nodes );

    auto gstate_of = [ & ]( std::vector< std::size_t > obl ) {
        auto [ it, inserted ] = gindex.emplace( obl, gstates.size() );
        if ( inserted )
            gstates.push_back( { std::move( obl ), {} } );
        return it->second;
    };
    std::vector< std::size_t > root_obl;
    if ( nodes.nodes[ root ].kind != Formula::Kind::True )
        root_obl.push_back( root );
    gstate_of( root_obl );
    for ( std::size_t i = 0; i < gstates.size(); ++i )
    {
        auto xs = expander.expand( gstates[ i ].obligations );
        detail::drop_subsumed( xs );
        for ( const auto& x : xs )
            gstate_of( x.next );
        gstates[ i ].out = std::move( xs );
    }

    // Degeneralize: level j means the first j eventualities were met since the
    // last accepting visit; level k (all met) is accepting.
    const std::size_t k = nodes.eventualities.size();
    BuchiAutomaton b;
    b.atoms = nodes.atoms;
    std::map< std::pair< std::size_t, std::size_t >, std::size_t > index;
    std::vector< std::pair< std::size_t, std::size_t > > work;

    auto state_of = [ & ]( std::size_t g, std::size_t level ) {
        auto [ it, inserted ] = index.emplace( std::pair{ g, level }, b.states.size() );
        if ( inserted )
        {
            std::string name = "{";
            for ( std::size_t id : gstates[ g ].obligations )
                name += ( name.size() > 1 ? ", " : "" ) + nodes.nodes[ id ].text;
            name += "}";
            if ( k > 0 )
                name += "/" + std::to_string( level );
            b.states.push_back( { std::move( name ), level == k, {} } );
            work.emplace_back( g, level );
        }
        return it->second;
    };

    b.initial.push_back( state_of( 0, 0 ) );
    for ( std::size_t w = 0; w < work.size(); ++w )
    {
        const auto [ g, level ] = work[ w ];
        std::vector< BuchiEdge > edges;
        for ( const auto& x : gstates[ g ].out )
        {
            std::size_t j = level == k ? 0 : level;
            while ( j < k && !std::binary_search( x.pending.begin(), x.pending.end(), nodes.eventualities[ j ] ) )
                ++j;
            BuchiEdge e{ x.label, state_of( gindex.at( x.next ), j ) };
            if ( std::find( edges.begin(), edges.end(), e ) == edges.end() )
                edges.push_back( std::move( e ) );
        }
        b.states[ w ].edges = std::move( edges );
    }
    return b;
}

inline std::string render_buchi( const BuchiAutomaton& b )
{
    std::string out;
    for ( std::size_t i = 0; i < b.states.size(); ++i )
    {
        const auto& s = b.states[ i ];
        out += "q" + std::to_string( i ) + ( s.accepting ? " accepting" : "" )
               + ( std::find( b.initial.begin(), b.initial.end(), i ) != b.initial.end() ? " initial" : "" ) + "  "
               + s.name + "\n";
        for ( const auto& e : s.edges )
            out += "  -> q" + std::to_string( e.target ) + " [" + render_label( b, e.label ) + "]\n";
    }
    return out;
}

} // namespace tickcheck
