#pragma once

#include "errors.hpp"
#include "expr.hpp"
#include "lexer.hpp"
#include "model.hpp"

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace tickcheck
{

namespace detail
{

// int a = 1, b;
inline void parse_var_decls( TokenCursor& cur, std::vector< VarDecl >& out )
{
    cur.expect( "int" );
    do
    {
        VarDecl v;
        v.name = cur.expect_identifier( "variable name" );
        if ( cur.accept( "=" ) )
        {
            const bool negative = cur.accept( "-" );
            v.initial = cur.expect_integer();
            if ( negative )
                v.initial = -v.initial;
        }
        out.push_back( std::move( v ) );
    } while ( cur.accept( "," ) );
    cur.expect( ";" );
}

// channel a, b;   channel {int} c;
inline void parse_channel_decls( TokenCursor& cur, std::vector< ChannelDecl >& out )
{
    cur.expect( "channel" );
    int arity = 0;
    if ( cur.accept( "{" ) )
    {
        cur.expect( "int" );
        cur.expect( "}" );
        arity = 1;
    }
    do
    {
        ChannelDecl c;
        c.name = cur.expect_identifier( "channel name" );
        c.arity = arity;
        out.push_back( std::move( c ) );
    } while ( cur.accept( "," ) );
    cur.expect( ";" );
}

inline std::vector< std::string > parse_id_list( TokenCursor& cur, std::string_view what )
{
    std::vector< std::string > ids;
    do
        ids.push_back( cur.expect_identifier( what ) );
    while ( cur.accept( "," ) );
    cur.accept( ";" );
    return ids;
}

inline Assignment parse_assignment( TokenCursor& cur )
{
    Assignment a;
    a.target = cur.expect_identifier( "assignment target" );
    if ( !cur.accept( "=" ) && !cur.accept( ":=" ) )
        cur.fail( "expected '='" );
    a.value = parse_expr( cur );
    return a;
}

inline Transition parse_transition( TokenCursor& cur )
{
    Transition t;
    t.src = cur.expect_identifier( "source state" );
    cur.expect( "->" );
    t.dst = cur.expect_identifier( "target state" );
    cur.expect( "{" );
    if ( cur.accept( "guard" ) )
    {
        t.guard = parse_expr( cur );
        cur.expect( ";" );
    }
    if ( cur.accept( "sync" ) )
    {
        SyncAction s;
        s.channel = cur.expect_identifier( "channel name" );
        if ( cur.accept( "!" ) )
        {
            s.dir = SyncDir::Send;
            if ( !cur.peek().is( ";" ) )
                s.value = parse_expr( cur );
        }
        else if ( cur.accept( "?" ) )
        {
            s.dir = SyncDir::Receive;
            if ( !cur.peek().is( ";" ) )
                s.target = cur.expect_identifier( "receive target variable" );
        }
        else
            cur.fail( "expected '!' or '?'" );
        cur.expect( ";" );
        t.sync = std::move( s );
        if ( cur.peek().is( "sync" ) )
            cur.fail( "a transition has at most one sync action" );
    }
    if ( cur.accept( "effect" ) )
    {
        do
            t.effects.push_back( parse_assignment( cur ) );
        while ( cur.accept( "," ) );
        cur.expect( ";" );
    }
    cur.expect( "}" );
    return t;
}

inline Process parse_process( TokenCursor& cur )
{
    Process p;
    cur.expect( "process" );
    p.name = cur.expect_identifier( "process name" );
    cur.expect( "{" );
    while ( cur.peek().is( "int" ) )
        parse_var_decls( cur, p.locals );
    cur.expect( "state" );
    p.states = parse_id_list( cur, "state name" );
    cur.expect( "init" );
    p.init = cur.expect_identifier( "initial state" );
    cur.accept( ";" );
    if ( cur.accept( "accept" ) )
        p.accepting = parse_id_list( cur, "accepting state" );
    if ( cur.accept( "trans" ) )
    {
        if ( !cur.peek().is( ";" ) && !cur.peek().is( "}" ) )
        {
            do
                p.transitions.push_back( parse_transition( cur ) );
            while ( cur.accept( "," ) );
        }
        cur.accept( ";" );
    }
    cur.expect( "}" );
    return p;
}

} // namespace detail

// Parses the model language:
//   channel a, b;  channel {int} c;  int x = 0;
//   process P { int y; state s, t; init s; accept t; trans s -> t { guard ...; sync a!; effect ...; }, ...; }
//   system async [property P];
// Name resolution is left to validate_model.
inline Model parse_model( std::string_view source )
{
    TokenCursor cur( tokenize( source ) );
    Model m;
    while ( !cur.at_end() )
    {
        const Token& t = cur.peek();
        if ( t.is( "channel" ) )
            detail::parse_channel_decls( cur, m.channels );
        else if ( t.is( "int" ) )
            detail::parse_var_decls( cur, m.globals );
        else if ( t.is( "process" ) )
            m.processes.push_back( detail::parse_process( cur ) );
        else if ( t.is( "system" ) )
        {
            cur.next();
            cur.expect( "async" );
            if ( cur.accept( "property" ) )
                m.property = cur.expect_identifier( "property process name" );
            cur.expect( ";" );
            if ( !cur.at_end() )
                cur.fail( "expected end of input after system declaration" );
        }
        else
            cur.fail( "expected 'channel', 'int', 'process' or 'system'" );
    }
    return m;
}

// ---------------------------------------------------------------------------

namespace detail
{

inline std::string join( const std::vector< std::string >& items, std::string_view sep )
{
    std::string out;
    for ( std::size_t i = 0; i < items.size(); ++i )
    {
        if ( i )
            out += sep;
        out += items[ i ];
    }
    return out;
}

inline std::string render_var_decl( const VarDecl& v )
{
    return "int " + v.name + " = " + std::to_string( v.initial ) + ";";
}

inline std::string render_transition( const Transition& t )
{
    std::string out = t.src + " -> " + t.dst + " {";
    if ( t.guard )
        out += " guard " + render( *t.guard ) + ";";
    if ( t.sync )
    {
        out += " sync " + t.sync->channel;
        if ( t.sync->dir == SyncDir::Send )
        {
            out += "!";
            if ( t.sync->value )
                out += render( *t.sync->value );
        }
        else
        {
            out += "?";
            if ( t.sync->target )
                out += *t.sync->target;
        }
        out += ";";
    }
    if ( !t.effects.empty() )
    {
        out += " effect ";
        for ( std::size_t i = 0; i < t.effects.size(); ++i )
        {
            if ( i )
                out += ", ";
            out += t.effects[ i ].target + " = " + render( t.effects[ i ].value );
        }
        out += ";";
    }
    out += t.effects.empty() && !t.guard && !t.sync ? "}" : " }";
    return out;
}

} // namespace detail

// Canonical text: channels, then globals, then processes, then the system line.
inline std::string render_model( const Model& m )
{
    std::string out;
    for ( const auto& c : m.channels )
        out += c.arity == 0 ? "channel " + c.name + ";\n" : "channel {int} " + c.name + ";\n";
    for ( const auto& v : m.globals )
        out += detail::render_var_decl( v ) + "\n";
    if ( !m.channels.empty() || !m.globals.empty() )
        out += "\n";

    for ( const auto& p : m.processes )
    {
        out += "process " + p.name + " {\n";
        for ( const auto& v : p.locals )
            out += "    " + detail::render_var_decl( v ) + "\n";
        out += "    state " + detail::join( p.states, ", " ) + ";\n";
        out += "    init " + p.init + ";\n";
        if ( !p.accepting.empty() )
            out += "    accept " + detail::join( p.accepting, ", " ) + ";\n";
        out += "    trans\n";
        for ( std::size_t i = 0; i < p.transitions.size(); ++i )
        {
            out += "        " + detail::render_transition( p.transitions[ i ] );
            out += i + 1 < p.transitions.size() ? ",\n" : "\n";
        }
        out += "    ;\n}\n\n";
    }

    out += m.property ? "system async property " + *m.property + ";\n" : "system async;\n";
    return out;
}

// ---------------------------------------------------------------------------

struct Diagnostic
{
    std::string message;

    friend bool operator==( const Diagnostic&, const Diagnostic& ) = default;
};

// Static well-formedness checks. Returns diagnostics in a deterministic order
// (model-level first, then per process in declaration order); empty iff valid.
inline std::vector< Diagnostic > validate_model( const Model& m )
{
    std::vector< Diagnostic > out;
    auto report = [ & ]( std::string msg ) { out.push_back( { std::move( msg ) } ); };

    if ( m.processes.empty() )
        report( "model has no processes" );

    std::set< std::string > seen;
    for ( const auto& c : m.channels )
    {
        if ( !seen.insert( c.name ).second )
            report( "duplicate channel name '" + c.name + "'" );
        if ( c.arity != 0 && c.arity != 1 )
            report( "channel '" + c.name + "' has unsupported arity" );
    }
    seen.clear();
    for ( const auto& v : m.globals )
    {
        if ( !seen.insert( v.name ).second )
            report( "duplicate variable name '" + v.name + "'" );
        if ( v.initial < value_min || v.initial > value_max )
            report( "initial value of '" + v.name + "' outside 0..65535" );
    }
    seen.clear();
    for ( const auto& p : m.processes )
        if ( !seen.insert( p.name ).second )
            report( "duplicate process name '" + p.name + "'" );

    std::optional< std::size_t > property_index;
    if ( m.property )
    {
        property_index = m.process_index( *m.property );
        if ( !property_index )
            report( "property process '" + *m.property + "' is not declared" );
    }

    for ( std::size_t pi = 0; pi < m.processes.size(); ++pi )
    {
        const Process& p = m.processes[ pi ];
        const std::string where = "process '" + p.name + "'";
        const bool is_property = property_index && *property_index == pi;

        std::set< std::string > locals;
        for ( const auto& v : p.locals )
        {
            if ( !locals.insert( v.name ).second )
                report( where + ": duplicate variable name '" + v.name + "'" );
            if ( v.initial < value_min || v.initial > value_max )
                report( where + ": initial value of '" + v.name + "' outside 0..65535" );
        }

        std::set< std::string > states;
        if ( p.states.empty() )
            report( where + ": no states declared" );
        for ( const auto& s : p.states )
            if ( !states.insert( s ).second )
                report( where + ": duplicate state name '" + s + "'" );
        if ( !states.count( p.init ) )
            report( where + ": initial state '" + p.init + "' is not declared" );
        for ( const auto& s : p.accepting )
            if ( !states.count( s ) )
                report( where + ": accepting state '" + s + "' is not declared" );

        auto check_vars = [ & ]( const Expr& e, const std::string& ctx ) {
            std::set< std::string > vars;
            collect_variables( e, vars );
            for ( const auto& v : vars )
            {
                if ( is_property && !m.has_global( v ) )
                    report( ctx + ": property guards may only reference global variables, found '" + v + "'" );
                else if ( !locals.count( v ) && !m.has_global( v ) )
                    report( ctx + ": undeclared variable '" + v + "'" );
            }
        };

        for ( std::size_t ti = 0; ti < p.transitions.size(); ++ti )
        {
            const Transition& t = p.transitions[ ti ];
            const std::string ctx = where + " transition " + std::to_string( ti ) + " (" + t.src + " -> " + t.dst + ")";
            if ( !states.count( t.src ) )
                report( ctx + ": undeclared state '" + t.src + "'" );
            if ( !states.count( t.dst ) )
                report( ctx + ": undeclared state '" + t.dst + "'" );
            if ( t.guard )
                check_vars( *t.guard, ctx );
            if ( is_property && ( t.sync || !t.effects.empty() ) )
                report( ctx + ": property process transitions may only carry guards" );
            if ( t.sync )
            {
                const ChannelDecl* ch = m.find_channel( t.sync->channel );
                if ( !ch )
                    report( ctx + ": undeclared channel '" + t.sync->channel + "'" );
                else if ( t.sync->dir == SyncDir::Send && ( ch->arity == 1 ) != t.sync->value.has_value() )
                    report( ctx + ": send on channel '" + ch->name + "' does not match its arity" );
                else if ( t.sync->dir == SyncDir::Receive && ch->arity == 0 && t.sync->target )
                    report( ctx + ": receive on channel '" + ch->name + "' does not match its arity" );
                if ( t.sync->value )
                    check_vars( *t.sync->value, ctx );
                if ( t.sync->target && !locals.count( *t.sync->target ) && !m.has_global( *t.sync->target ) )
                    report( ctx + ": undeclared variable '" + *t.sync->target + "'" );
            }
            for ( const auto& a : t.effects )
            {
                if ( !locals.count( a.target ) && !m.has_global( a.target ) )
                    report( ctx + ": undeclared variable '" + a.target + "'" );
                check_vars( a.value, ctx );
            }
        }
    }
    return out;
}

} // namespace tickcheck
