#pragma once

// Timing-annotated process skeletons and their line-oriented text format:
//
//   # comment
//   shared NAME = INT
//   process NAME init LOC
//   timer NAME
//   var NAME = INT
//   edge SRC -> DST [within T | inwindow T | afterdelay T] [set T LB UB]* [guard EXPR] [effect A(, A)*]
//
// `timer`, `var` and `edge` lines belong to the most recent `process`. Locations
// are the init location plus every edge endpoint, in order of first mention. A set
// bound is an integer, a variable, or `inf` (upper bound only). Inside guards and
// effects a timer name reads the timer's remaining upper bound.

#include "tickcheck/errors.hpp"
#include "tickcheck/expr.hpp"
#include "tickcheck/lexer.hpp"
#include "tickcheck/model.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace tickcheck
{

enum class Trigger
{
    None,
    Within,     // lower bound reached; the upper bound stops time
    InWindow,   // lower bound reached and upper bound not yet lapsed; a lapsed window does not stop time
    AfterDelay, // fixed delay (lb == ub at every setting site)
};

struct TimerSet
{
    std::string timer;
    Expr lb;
    std::optional< Expr > ub; // empty: infinity

    friend bool operator==( const TimerSet&, const TimerSet& ) = default;
};

struct SkeletonEdge
{
    std::string src, dst;
    Trigger trigger = Trigger::None;
    std::string trigger_timer;
    std::vector< TimerSet > sets;
    std::optional< Expr > guard;
    std::vector< Assignment > effects;

    friend bool operator==( const SkeletonEdge&, const SkeletonEdge& ) = default;
};

struct SkeletonProcess
{
    std::string name;
    std::vector< VarDecl > locals;
    std::vector< std::string > timers;
    std::vector< std::string > locations;
    std::string init;
    std::vector< SkeletonEdge > edges;

    friend bool operator==( const SkeletonProcess&, const SkeletonProcess& ) = default;

    [[nodiscard]] bool has_timer( const std::string& t ) const
    {
        return std::find( timers.begin(), timers.end(), t ) != timers.end();
    }

    void add_location( const std::string& loc )
    {
        if ( std::find( locations.begin(), locations.end(), loc ) == locations.end() )
            locations.push_back( loc );
    }

    // Timers some edge leaving `loc` waits on.
    [[nodiscard]] std::vector< std::string > consumed_at( const std::string& loc ) const
    {
        std::vector< std::string > out;
        for ( const auto& e : edges )
            if ( e.src == loc && e.trigger != Trigger::None
                 && std::find( out.begin(), out.end(), e.trigger_timer ) == out.end() )
                out.push_back( e.trigger_timer );
        return out;
    }

    // Timers whose upper bound stops time: those consumed by a Within or AfterDelay edge.
    [[nodiscard]] bool is_hard( const std::string& t ) const
    {
        for ( const auto& e : edges )
            if ( e.trigger_timer == t && ( e.trigger == Trigger::Within || e.trigger == Trigger::AfterDelay ) )
                return true;
        return false;
    }
};

struct TickConfig
{
    std::optional< bool > emit_now; // empty: only if some guard or effect reads `now`
    std::int64_t maximal = 65535;   // `now` wraps modulo this
    std::int64_t infinity = 65535;  // inactive upper bound
};

struct TimedSkeleton
{
    std::vector< VarDecl > shared;
    std::vector< SkeletonProcess > processes;
    TickConfig config;

    friend bool operator==( const TimedSkeleton& a, const TimedSkeleton& b )
    {
        return a.shared == b.shared && a.processes == b.processes;
    }

    [[nodiscard]] bool reads_now() const
    {
        std::set< std::string > vars;
        for ( const auto& p : processes )
            for ( const auto& e : p.edges )
            {
                if ( e.guard )
                    collect_variables( *e.guard, vars );
                for ( const auto& a : e.effects )
                    collect_variables( a.value, vars );
                for ( const auto& s : e.sets )
                {
                    collect_variables( s.lb, vars );
                    if ( s.ub )
                        collect_variables( *s.ub, vars );
                }
            }
        return vars.count( "now" ) > 0;
    }

    [[nodiscard]] bool emits_now() const { return config.emit_now.value_or( reads_now() ); }
};

// Structural checks; throws ValidationError naming the first problem found.
inline void validate_skeleton( const TimedSkeleton& sk )
{
    auto fail = []( const std::string& msg ) { throw ValidationError( msg ); };
    const auto& cfg = sk.config;
    if ( cfg.maximal < 2 || cfg.maximal > value_max + 1 )
        fail( "maximal must be in 2..65536" );
    if ( cfg.infinity < 1 || cfg.infinity > value_max )
        fail( "infinity must be in 1..65535" );
    if ( cfg.emit_now == false && sk.reads_now() )
        fail( "'now' is read but the clock is disabled" );
    if ( sk.processes.empty() )
        fail( "skeleton has no processes" );

    std::set< std::string > shared;
    for ( const auto& v : sk.shared )
    {
        if ( v.name == "now" )
            fail( "'now' is reserved" );
        if ( !shared.insert( v.name ).second )
            fail( "duplicate shared variable '" + v.name + "'" );
        if ( v.initial < value_min || v.initial > value_max )
            fail( "initial value of '" + v.name + "' outside 0..65535" );
    }

    std::set< std::string > proc_names;
    for ( const auto& p : sk.processes )
    {
        if ( !proc_names.insert( p.name ).second )
            fail( "duplicate process name '" + p.name + "'" );
        std::set< std::string > names = shared;
        names.insert( "now" );
        for ( const auto& v : p.locals )
        {
            if ( !names.insert( v.name ).second )
                fail( p.name + ": duplicate variable '" + v.name + "'" );
            if ( v.initial < value_min || v.initial > value_max )
                fail( p.name + ": initial value of '" + v.name + "' outside 0..65535" );
        }
        for ( const auto& t : p.timers )
            if ( !names.insert( t ).second )
                fail( p.name + ": duplicate timer '" + t + "'" );
        if ( std::find( p.locations.begin(), p.locations.end(), p.init ) == p.locations.end() )
            fail( p.name + ": initial location '" + p.init + "' not declared" );

        auto check_expr = [ & ]( const Expr& e, const std::string& where ) {
            std::set< std::string > used;
            collect_variables( e, used );
            for ( const auto& u : used )
                if ( !names.count( u ) )
                    fail( p.name + ": undeclared variable '" + u + "' in " + where );
        };
        auto literal = []( const Expr& e ) -> std::optional< std::int64_t > {
            if ( e.kind == Expr::Kind::Literal )
                return e.value;
            return std::nullopt;
        };

        for ( const auto& e : p.edges )
        {
            const std::string where = "edge " + e.src + " -> " + e.dst;
            for ( const auto& loc : { e.src, e.dst } )
                if ( std::find( p.locations.begin(), p.locations.end(), loc ) == p.locations.end() )
                    fail( p.name + ": " + where + " uses undeclared location '" + loc + "'" );
            if ( e.trigger != Trigger::None )
            {
                if ( !p.has_timer( e.trigger_timer ) )
                    fail( p.name + ": " + where + " waits on undeclared timer '" + e.trigger_timer + "'" );
                const bool set_somewhere = std::any_of( p.edges.begin(), p.edges.end(), [ & ]( const SkeletonEdge& o ) {
                    return std::any_of( o.sets.begin(), o.sets.end(), [ & ]( const TimerSet& s ) { return s.timer == e.trigger_timer; } );
                } );
                if ( !set_somewhere )
                    fail( p.name + ": timer '" + e.trigger_timer + "' is waited on but never set" );
            }
            if ( e.guard )
                check_expr( *e.guard, where );
            for ( const auto& a : e.effects )
            {
                if ( !names.count( a.target ) || a.target == "now" || p.has_timer( a.target ) )
                    fail( p.name + ": " + where + " assigns '" + a.target + "', which is not a variable" );
                check_expr( a.value, where );
            }
            std::set< std::string > set_here;
            for ( const auto& s : e.sets )
            {
                if ( !p.has_timer( s.timer ) )
                    fail( p.name + ": " + where + " sets undeclared timer '" + s.timer + "'" );
                if ( !set_here.insert( s.timer ).second )
                    fail( p.name + ": " + where + " sets timer '" + s.timer + "' twice" );
                check_expr( s.lb, where );
                if ( s.ub )
                    check_expr( *s.ub, where );
                const auto lb = literal( s.lb );
                const auto ub = s.ub ? literal( *s.ub ) : std::optional< std::int64_t >( cfg.infinity );
                if ( lb && ub && *lb > *ub )
                    fail( p.name + ": " + where + " sets timer '" + s.timer + "' with lb > ub" );
                if ( lb && ( *lb < 0 || *lb >= cfg.infinity ) )
                    fail( p.name + ": " + where + " lower bound out of range" );
                if ( s.ub && ub && ( *ub < 0 || *ub >= cfg.infinity ) )
                    fail( p.name + ": " + where + " upper bound must stay below infinity" );
            }
        }

        // Fixed delays: every site setting a timer consumed by `afterdelay` sets lb == ub.
        for ( const auto& e : p.edges )
        {
            if ( e.trigger != Trigger::AfterDelay )
                continue;
            for ( const auto& o : p.edges )
                for ( const auto& s : o.sets )
                    if ( s.timer == e.trigger_timer && ( !s.ub || !( *s.ub == s.lb ) ) )
                        fail( p.name + ": fixed delay '" + s.timer + "' must be set with lb == ub" );
        }
    }
}

// ---------------------------------------------------------------------------
// Parsing

namespace detail
{

inline std::vector< std::vector< Token > > tokens_by_line( std::string_view text )
{
    LexerOptions opts;
    opts.hash_comments = true;
    std::vector< std::vector< Token > > lines;
    std::size_t current = 0;
    for ( auto& t : tokenize( text, opts ) )
    {
        if ( t.kind == TokenKind::End )
            break;
        if ( lines.empty() || t.pos.line != current )
        {
            lines.emplace_back();
            current = t.pos.line;
        }
        lines.back().push_back( std::move( t ) );
    }
    for ( auto& line : lines )
    {
        Token end;
        end.kind = TokenKind::End;
        end.pos = line.back().pos;
        end.pos.column += line.back().text.size();
        line.push_back( end );
    }
    return lines;
}

inline VarDecl parse_skeleton_decl( TokenCursor& cur )
{
    VarDecl v;
    v.name = cur.expect_identifier( "variable name" );
    if ( cur.accept( "=" ) )
    {
        const bool negative = cur.accept( "-" );
        v.initial = cur.expect_integer() * ( negative ? -1 : 1 );
    }
    return v;
}

inline Expr parse_bound( TokenCursor& cur )
{
    if ( cur.peek().kind == TokenKind::Integer )
        return expr::lit( cur.expect_integer() );
    return expr::var( cur.expect_identifier( "bound" ) );
}

inline SkeletonEdge parse_skeleton_edge( TokenCursor& cur )
{
    SkeletonEdge e;
    e.src = cur.expect_identifier( "source location" );
    cur.expect( "->" );
    e.dst = cur.expect_identifier( "target location" );
    static const std::map< std::string, Trigger > triggers = {
        { "within", Trigger::Within }, { "inwindow", Trigger::InWindow }, { "afterdelay", Trigger::AfterDelay } };
    if ( cur.peek().kind == TokenKind::Identifier )
    {
        if ( auto it = triggers.find( cur.peek().text ); it != triggers.end() )
        {
            cur.next();
            e.trigger = it->second;
            e.trigger_timer = cur.expect_identifier( "timer name" );
        }
    }
    while ( cur.accept( "set" ) )
    {
        TimerSet s;
        s.timer = cur.expect_identifier( "timer name" );
        s.lb = parse_bound( cur );
        if ( cur.peek().is( "inf" ) || cur.peek().is( "INF" ) )
            cur.next();
        else
            s.ub = parse_bound( cur );
        e.sets.push_back( std::move( s ) );
    }
    if ( cur.accept( "guard" ) )
        e.guard = parse_expr( cur );
    if ( cur.accept( "effect" ) )
    {
        do
        {
            Assignment a;
            a.target = cur.expect_identifier( "assignment target" );
            if ( !cur.accept( ":=" ) )
                cur.expect( "=" );
            a.value = parse_expr( cur );
            e.effects.push_back( std::move( a ) );
        } while ( cur.accept( "," ) );
    }
    return e;
}

} // namespace detail

inline TimedSkeleton parse_skeleton( std::string_view text )
{
    TimedSkeleton sk;
    for ( auto& line : detail::tokens_by_line( text ) )
    {
        TokenCursor cur( std::move( line ) );
        const Token& head = cur.peek();
        if ( head.kind != TokenKind::Identifier )
            cur.fail( "expected a declaration keyword" );
        const std::string kw = cur.next().text;
        if ( kw == "shared" )
            sk.shared.push_back( detail::parse_skeleton_decl( cur ) );
        else if ( kw == "process" )
        {
            SkeletonProcess p;
            p.name = cur.expect_identifier( "process name" );
            cur.expect( "init" );
            p.init = cur.expect_identifier( "initial location" );
            p.add_location( p.init );
            sk.processes.push_back( std::move( p ) );
        }
        else if ( kw == "timer" || kw == "var" || kw == "edge" )
        {
            if ( sk.processes.empty() )
                throw ParseError( head.pos, "'" + kw + "' outside a process" );
            auto& p = sk.processes.back();
            if ( kw == "timer" )
                p.timers.push_back( cur.expect_identifier( "timer name" ) );
            else if ( kw == "var" )
                p.locals.push_back( detail::parse_skeleton_decl( cur ) );
            else
            {
                SkeletonEdge e = detail::parse_skeleton_edge( cur );
                p.add_location( e.src );
                p.add_location( e.dst );
                p.edges.push_back( std::move( e ) );
            }
        }
        else
            throw ParseError( head.pos, "unknown keyword '" + kw + "'" );
        if ( !cur.at_end() )
            cur.fail( "unexpected trailing input" );
    }
    validate_skeleton( sk );
    return sk;
}

inline std::string render_skeleton( const TimedSkeleton& sk )
{
    std::string out;
    for ( const auto& v : sk.shared )
        out += "shared " + v.name + " = " + std::to_string( v.initial ) + "\n";
    for ( const auto& p : sk.processes )
    {
        out += "process " + p.name + " init " + p.init + "\n";
        for ( const auto& t : p.timers )
            out += "timer " + t + "\n";
        for ( const auto& v : p.locals )
            out += "var " + v.name + " = " + std::to_string( v.initial ) + "\n";
        for ( const auto& e : p.edges )
        {
            out += "edge " + e.src + " -> " + e.dst;
            switch ( e.trigger )
            {
            case Trigger::None: break;
            case Trigger::Within: out += " within " + e.trigger_timer; break;
            case Trigger::InWindow: out += " inwindow " + e.trigger_timer; break;
            case Trigger::AfterDelay: out += " afterdelay " + e.trigger_timer; break;
            }
            for ( const auto& s : e.sets )
                out += " set " + s.timer + " " + render( s.lb ) + " " + ( s.ub ? render( *s.ub ) : "inf" );
            if ( e.guard )
                out += " guard " + render( *e.guard );
            for ( std::size_t i = 0; i < e.effects.size(); ++i )
                out += ( i == 0 ? " effect " : ", " ) + e.effects[ i ].target + " = " + render( e.effects[ i ].value );
            out += "\n";
        }
    }
    return out;
}

} // namespace tickcheck
