#pragma once

#include "dve.hpp"
#include "errors.hpp"
#include "expr.hpp"
#include "model.hpp"
#include "state_store.hpp"

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace tickcheck
{

// Snapshot of a system state. Slot layout is fixed per model (see CompiledModel):
// globals in declaration order, then for each system process its location index
// followed by its locals in declaration order.
class StateVector
{
    std::vector< std::uint16_t > _slots;

public:
    StateVector() = default;
    explicit StateVector( std::vector< std::uint16_t > slots ) : _slots{ std::move( slots ) } {}
    explicit StateVector( std::span< const std::uint16_t > slots ) : _slots( slots.begin(), slots.end() ) {}

    [[nodiscard]] std::span< const std::uint16_t > slots() const { return _slots; }
    [[nodiscard]] std::span< std::uint16_t > slots() { return _slots; }
    [[nodiscard]] std::uint16_t operator[]( std::size_t i ) const { return _slots[ i ]; }

    friend bool operator==( const StateVector&, const StateVector& ) = default;
};

// Little-endian, two bytes per slot. Injective for states of one model since the
// layout has fixed order and width.
inline std::string encode( const StateVector& s )
{
    std::string out;
    out.reserve( s.slots().size() * 2 );
    for ( auto v : s.slots() )
    {
        out.push_back( static_cast< char >( v & 0xff ) );
        out.push_back( static_cast< char >( v >> 8 ) );
    }
    return out;
}

inline StateVector decode( std::string_view bytes )
{
    if ( bytes.size() % 2 != 0 )
        throw std::invalid_argument( "state encoding has odd length" );
    std::vector< std::uint16_t > slots( bytes.size() / 2 );
    for ( std::size_t i = 0; i < slots.size(); ++i )
        slots[ i ] = static_cast< std::uint16_t >( static_cast< unsigned char >( bytes[ 2 * i ] )
                                                   | ( static_cast< unsigned char >( bytes[ 2 * i + 1 ] ) << 8 ) );
    return StateVector( std::move( slots ) );
}

struct TransitionRef
{
    std::size_t process = 0;    // index into Model::processes
    std::size_t transition = 0; // index into Process::transitions

    friend bool operator==( const TransitionRef&, const TransitionRef& ) = default;
    friend auto operator<=>( const TransitionRef&, const TransitionRef& ) = default;
};

// One interleaving step: a solo transition (no sync) or a sender/receiver pair
// executed atomically.
struct ExecChoice
{
    TransitionRef primary;                // the solo transition, or the sender
    std::optional< TransitionRef > receiver;

    [[nodiscard]] bool is_rendezvous() const { return receiver.has_value(); }

    static ExecChoice solo( TransitionRef t ) { return { t, std::nullopt }; }
    static ExecChoice rendezvous( TransitionRef sender, TransitionRef receiver ) { return { sender, receiver }; }

    friend bool operator==( const ExecChoice&, const ExecChoice& ) = default;
};

struct ReachabilityReport
{
    std::size_t state_count = 0;
    std::size_t transition_count = 0;
    std::size_t deadlock_states = 0;
    std::size_t max_depth = 0;

    friend bool operator==( const ReachabilityReport&, const ReachabilityReport& ) = default;
};

// Validated model with names resolved to slots and expressions compiled.
class CompiledModel
{
public:
    struct CompiledSync
    {
        std::size_t channel = 0;
        SyncDir dir = SyncDir::Send;
        std::optional< CompiledExpr > value;
        std::optional< std::size_t > target_slot;
    };

    struct CompiledTransition
    {
        std::size_t src = 0;
        std::size_t dst = 0;
        CompiledExpr guard;
        std::optional< CompiledSync > sync;
        std::vector< std::pair< std::size_t, CompiledExpr > > effects;
    };

    struct CompiledProcess
    {
        std::size_t model_index = 0;
        std::size_t location_slot = 0;
        std::size_t first_local_slot = 0;
        std::vector< CompiledTransition > transitions;
        std::vector< std::vector< std::size_t > > by_source; // location -> transition indices
    };

private:
    Model _model;
    std::vector< CompiledProcess > _procs;            // system processes, declaration order
    std::vector< std::optional< std::size_t > > _proc_of_model; // model process index -> _procs index
    std::vector< std::string > _slot_names;
    std::vector< std::uint16_t > _initial;
    std::map< std::string, std::size_t > _global_slot;

    std::size_t resolve( const Process* p, std::size_t first_local, const std::string& name ) const
    {
        if ( p )
        {
            for ( std::size_t i = 0; i < p->locals.size(); ++i )
                if ( p->locals[ i ].name == name )
                    return first_local + i;
        }
        auto it = _global_slot.find( name );
        if ( it == _global_slot.end() )
            throw ValidationError( "undeclared variable '" + name + "'" );
        return it->second;
    }

public:
    explicit CompiledModel( Model model ) : _model{ std::move( model ) }
    {
        const auto diags = validate_model( _model );
        if ( !diags.empty() )
        {
            std::string msg = "invalid model:";
            for ( const auto& d : diags )
                msg += "\n  " + d.message;
            throw ValidationError( msg );
        }

        for ( const auto& g : _model.globals )
        {
            _global_slot[ g.name ] = _slot_names.size();
            _slot_names.push_back( g.name );
            _initial.push_back( static_cast< std::uint16_t >( g.initial ) );
        }

        const auto property = _model.property ? _model.process_index( *_model.property ) : std::nullopt;
        _proc_of_model.assign( _model.processes.size(), std::nullopt );
        for ( std::size_t pi = 0; pi < _model.processes.size(); ++pi )
        {
            if ( property && *property == pi )
                continue;
            const Process& p = _model.processes[ pi ];
            CompiledProcess cp;
            cp.model_index = pi;
            cp.location_slot = _slot_names.size();
            _slot_names.push_back( p.name + ".@location" );
            _initial.push_back( static_cast< std::uint16_t >( *p.state_index( p.init ) ) );
            cp.first_local_slot = _slot_names.size();
            for ( const auto& v : p.locals )
            {
                _slot_names.push_back( p.name + "." + v.name );
                _initial.push_back( static_cast< std::uint16_t >( v.initial ) );
            }
            _proc_of_model[ pi ] = _procs.size();
            _procs.push_back( std::move( cp ) );
        }

        for ( auto& cp : _procs )
        {
            const Process& p = _model.processes[ cp.model_index ];
            auto res = [ & ]( const std::string& n ) { return resolve( &p, cp.first_local_slot, n ); };
            cp.by_source.assign( p.states.size(), {} );
            for ( std::size_t ti = 0; ti < p.transitions.size(); ++ti )
            {
                const Transition& t = p.transitions[ ti ];
                CompiledTransition ct;
                ct.src = *p.state_index( t.src );
                ct.dst = *p.state_index( t.dst );
                if ( t.guard )
                    ct.guard = CompiledExpr( *t.guard, res );
                if ( t.sync )
                {
                    CompiledSync cs;
                    for ( std::size_t ci = 0; ci < _model.channels.size(); ++ci )
                        if ( _model.channels[ ci ].name == t.sync->channel )
                            cs.channel = ci;
                    cs.dir = t.sync->dir;
                    if ( t.sync->value )
                        cs.value = CompiledExpr( *t.sync->value, res );
                    if ( t.sync->target )
                        cs.target_slot = res( *t.sync->target );
                    ct.sync = std::move( cs );
                }
                for ( const auto& a : t.effects )
                    ct.effects.emplace_back( res( a.target ), CompiledExpr( a.value, res ) );
                cp.by_source[ ct.src ].push_back( ti );
                cp.transitions.push_back( std::move( ct ) );
            }
        }
    }

    [[nodiscard]] const Model& model() const { return _model; }
    [[nodiscard]] std::size_t width() const { return _slot_names.size(); }
    [[nodiscard]] const std::vector< CompiledProcess >& processes() const { return _procs; }
    [[nodiscard]] const std::string& slot_name( std::size_t slot ) const { return _slot_names[ slot ]; }

    [[nodiscard]] const CompiledProcess& process( std::size_t model_index ) const
    {
        const auto& idx = _proc_of_model.at( model_index );
        if ( !idx )
            throw std::out_of_range( "process is not a system process" );
        return _procs[ *idx ];
    }

    [[nodiscard]] std::size_t global_slot( const std::string& name ) const
    {
        auto it = _global_slot.find( name );
        if ( it == _global_slot.end() )
            throw std::out_of_range( "no global variable '" + name + "'" );
        return it->second;
    }

    // Slot of `process.var`, or of global `var` when `process` is empty.
    [[nodiscard]] std::size_t slot( const std::string& process_name, const std::string& var ) const
    {
        if ( process_name.empty() )
            return global_slot( var );
        const auto pi = _model.process_index( process_name );
        if ( !pi )
            throw std::out_of_range( "no process '" + process_name + "'" );
        const auto& cp = process( *pi );
        return resolve( &_model.processes[ *pi ], cp.first_local_slot, var );
    }

    [[nodiscard]] std::uint16_t value( const StateVector& s, const std::string& process_name, const std::string& var ) const
    {
        return s[ slot( process_name, var ) ];
    }

    [[nodiscard]] const std::string& location_name( const StateVector& s, const std::string& process_name ) const
    {
        const auto pi = _model.process_index( process_name );
        if ( !pi )
            throw std::out_of_range( "no process '" + process_name + "'" );
        return _model.processes[ *pi ].states.at( s[ process( *pi ).location_slot ] );
    }

    [[nodiscard]] StateVector initial_state() const { return StateVector( _initial ); }

    [[nodiscard]] const CompiledTransition& transition( TransitionRef r ) const
    {
        return process( r.process ).transitions.at( r.transition );
    }

    // Resolves an expression over global variables only (formula atoms, property guards).
    [[nodiscard]] CompiledExpr compile_global( const Expr& e ) const
    {
        return CompiledExpr( e, [ & ]( const std::string& n ) { return resolve( nullptr, 0, n ); } );
    }
};

inline StateVector initial_state( const CompiledModel& m ) { return m.initial_state(); }

// Appends the enabled choices of `s` to `out` (cleared first). Solo choices come first,
// ordered by (process, transition); then rendezvous pairs ordered by
// (sender process, sender transition, receiver process, receiver transition).
inline void enabled_choices( const CompiledModel& m, const StateVector& s, std::vector< ExecChoice >& out )
{
    out.clear();
    struct SyncCandidate
    {
        TransitionRef ref;
        std::size_t channel;
        std::size_t proc;
    };
    thread_local std::vector< SyncCandidate > senders, receivers;
    senders.clear();
    receivers.clear();

    const auto slots = s.slots();
    const auto& procs = m.processes();
    for ( std::size_t pi = 0; pi < procs.size(); ++pi )
    {
        const auto& cp = procs[ pi ];
        for ( std::size_t ti : cp.by_source[ slots[ cp.location_slot ] ] )
        {
            const auto& t = cp.transitions[ ti ];
            if ( !t.guard.holds( slots ) )
                continue;
            const TransitionRef ref{ cp.model_index, ti };
            if ( !t.sync )
                out.push_back( ExecChoice::solo( ref ) );
            else if ( t.sync->dir == SyncDir::Send )
                senders.push_back( { ref, t.sync->channel, pi } );
            else
                receivers.push_back( { ref, t.sync->channel, pi } );
        }
    }
    for ( const auto& snd : senders )
        for ( const auto& rcv : receivers )
            if ( snd.channel == rcv.channel && snd.proc != rcv.proc )
                out.push_back( ExecChoice::rendezvous( snd.ref, rcv.ref ) );
}

inline std::vector< ExecChoice > enabled_choices( const CompiledModel& m, const StateVector& s )
{
    std::vector< ExecChoice > out;
    enabled_choices( m, s, out );
    return out;
}

namespace detail
{

inline void assign_checked( std::span< std::uint16_t > slots, std::size_t slot, std::int64_t v, const CompiledModel& m )
{
    if ( v < value_min || v > value_max )
        throw OverflowError( "assignment of " + std::to_string( v ) + " to '" + m.slot_name( slot )
                             + "' leaves 0..65535" );
    slots[ slot ] = static_cast< std::uint16_t >( v );
}

inline void run_effects( const CompiledModel& m, const CompiledModel::CompiledTransition& t, std::span< std::uint16_t > slots )
{
    for ( const auto& [ slot, value ] : t.effects )
        assign_checked( slots, slot, value.eval( slots ), m );
}

} // namespace detail

// Executes `c` on `s` into `out`. Rendezvous order: the payload is evaluated in the
// pre-state, then sender effects run, then the payload is stored in the receiver's
// target, then receiver effects run. Each assignment sees all earlier ones.
// Throws std::invalid_argument if `c` is structurally not a legal choice (a synced
// transition fired solo, mismatched channel or direction) and OverflowError if an
// assignment leaves the variable domain.
inline void apply_choice( const CompiledModel& m, const StateVector& s, const ExecChoice& c, StateVector& out )
{
    out = s;
    auto slots = out.slots();
    const auto& first = m.transition( c.primary );
    const auto& first_proc = m.process( c.primary.process );

    if ( !c.receiver )
    {
        if ( first.sync )
            throw std::invalid_argument( "synchronizing transition executed without a partner" );
        slots[ first_proc.location_slot ] = static_cast< std::uint16_t >( first.dst );
        detail::run_effects( m, first, slots );
        return;
    }

    const auto& second = m.transition( *c.receiver );
    const auto& second_proc = m.process( c.receiver->process );
    if ( !first.sync || !second.sync || first.sync->dir != SyncDir::Send || second.sync->dir != SyncDir::Receive
         || first.sync->channel != second.sync->channel || c.primary.process == c.receiver->process )
        throw std::invalid_argument( "rendezvous pair does not match on channel and direction" );

    std::optional< std::int64_t > payload;
    if ( first.sync->value )
        payload = first.sync->value->eval( s.slots() );

    slots[ first_proc.location_slot ] = static_cast< std::uint16_t >( first.dst );
    slots[ second_proc.location_slot ] = static_cast< std::uint16_t >( second.dst );
    detail::run_effects( m, first, slots );
    if ( payload && second.sync->target_slot )
        detail::assign_checked( slots, *second.sync->target_slot, *payload, m );
    detail::run_effects( m, second, slots );
}

inline StateVector apply_choice( const CompiledModel& m, const StateVector& s, const ExecChoice& c )
{
    StateVector out;
    apply_choice( m, s, c, out );
    return out;
}

struct ExploreOptions
{
    std::optional< std::size_t > max_states;
};

// Breadth-first exhaustive exploration from the initial state. `on_edge(from, choice, to)`
// is invoked for every traversed edge in visitation order. Throws LimitExceeded when
// more than `max_states` states would be stored.
template < typename OnEdge >
ReachabilityReport explore_reachable( const CompiledModel& m, const ExploreOptions& opts, OnEdge&& on_edge )
{
    ReachabilityReport report;
    StateStore store( m.width() );
    std::vector< std::size_t > depth_of;

    const StateVector init = m.initial_state();
    store.insert( init.slots() );
    depth_of.push_back( 0 );

    std::vector< ExecChoice > choices;
    StateVector current, next;
    for ( StateStore::Id id = 0; id < store.size(); ++id )
    {
        current = StateVector( store.get( id ) );
        enabled_choices( m, current, choices );
        if ( choices.empty() )
            ++report.deadlock_states;
        for ( const auto& c : choices )
        {
            apply_choice( m, current, c, next );
            ++report.transition_count;
            on_edge( current, c, next );
            auto [ nid, inserted ] = store.insert( next.slots() );
            if ( inserted )
            {
                if ( opts.max_states && store.size() > *opts.max_states )
                    throw LimitExceeded( store.size() - 1 );
                depth_of.push_back( depth_of[ id ] + 1 );
                report.max_depth = std::max( report.max_depth, depth_of.back() );
            }
        }
    }
    report.state_count = store.size();
    return report;
}

inline ReachabilityReport explore_reachable( const CompiledModel& m, const ExploreOptions& opts = {} )
{
    return explore_reachable( m, opts, []( const StateVector&, const ExecChoice&, const StateVector& ) {} );
}

} // namespace tickcheck
