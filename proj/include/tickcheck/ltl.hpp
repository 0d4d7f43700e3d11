#pragma once

// Linear temporal logic formulas over expression atoms.
//
// Grammar, loosest binding first:
//   f ::= f -> f          (right associative)
//       | f || f
//       | f && f
//       | f U f | f R f   (right associative)
//       | ! f | G f | F f | X f
//       | true | false | ( f ) | atom
// where an atom is an arithmetic comparison such as `c < 2` (or any expression
// below the && level; nonzero means true). G, F, X, U and R are reserved.

#include "tickcheck/errors.hpp"
#include "tickcheck/expr.hpp"
#include "tickcheck/lexer.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace tickcheck
{

struct Formula
{
    enum class Kind
    {
        True,
        False,
        Atom,
        Not,
        And,
        Or,
        Implies,
        Next,
        Globally,
        Finally,
        Until,
        Release,
    };

    Kind kind = Kind::True;
    Expr atom;                   // Atom only
    std::vector< Formula > args; // operands in source order

    friend bool operator==( const Formula&, const Formula& ) = default;
};

namespace ltl
{

inline Formula make( Formula::Kind k, std::vector< Formula > args = {} )
{
    Formula f;
    f.kind = k;
    f.args = std::move( args );
    return f;
}

inline Formula tt() { return make( Formula::Kind::True ); }
inline Formula ff() { return make( Formula::Kind::False ); }
inline Formula atom( Expr e )
{
    Formula f = make( Formula::Kind::Atom );
    f.atom = std::move( e );
    return f;
}
inline Formula atom( std::string_view text ) { return atom( parse_expr( text ) ); }
inline Formula neg( Formula a ) { return make( Formula::Kind::Not, { std::move( a ) } ); }
inline Formula conj( Formula a, Formula b ) { return make( Formula::Kind::And, { std::move( a ), std::move( b ) } ); }
inline Formula disj( Formula a, Formula b ) { return make( Formula::Kind::Or, { std::move( a ), std::move( b ) } ); }
inline Formula implies( Formula a, Formula b ) { return make( Formula::Kind::Implies, { std::move( a ), std::move( b ) } ); }
inline Formula next( Formula a ) { return make( Formula::Kind::Next, { std::move( a ) } ); }
inline Formula globally( Formula a ) { return make( Formula::Kind::Globally, { std::move( a ) } ); }
inline Formula finally( Formula a ) { return make( Formula::Kind::Finally, { std::move( a ) } ); }
inline Formula until( Formula a, Formula b ) { return make( Formula::Kind::Until, { std::move( a ), std::move( b ) } ); }
inline Formula release( Formula a, Formula b ) { return make( Formula::Kind::Release, { std::move( a ), std::move( b ) } ); }

} // namespace ltl

// ---------------------------------------------------------------------------
// Rendering

namespace detail
{

inline int ltl_precedence( Formula::Kind k )
{
    using K = Formula::Kind;
    switch ( k )
    {
    case K::Implies: return 1;
    case K::Or: return 2;
    case K::And: return 3;
    case K::Until:
    case K::Release: return 4;
    case K::Not:
    case K::Next:
    case K::Globally:
    case K::Finally: return 5;
    default: return 6;
    }
}

inline void render_ltl_into( const Formula& f, std::string& out );

inline void render_ltl_operand( const Formula& f, int min_prec, std::string& out )
{
    const bool paren = ltl_precedence( f.kind ) < min_prec;
    if ( paren )
        out += '(';
    render_ltl_into( f, out );
    if ( paren )
        out += ')';
}

inline void render_ltl_into( const Formula& f, std::string& out )
{
    using K = Formula::Kind;
    const int prec = ltl_precedence( f.kind );
    switch ( f.kind )
    {
    case K::True: out += "true"; return;
    case K::False: out += "false"; return;
    case K::Atom:
        if ( f.atom.kind == Expr::Kind::Variable )
            out += f.atom.name;
        else
            out += "(" + render( f.atom ) + ")";
        return;
    case K::Not:
    case K::Next:
    case K::Globally:
    case K::Finally:
        out += f.kind == K::Not ? "!" : f.kind == K::Next ? "X " : f.kind == K::Globally ? "G " : "F ";
        render_ltl_operand( f.args[ 0 ], prec, out );
        return;
    default: break;
    }
    const bool right_assoc = f.kind == K::Implies || f.kind == K::Until || f.kind == K::Release;
    render_ltl_operand( f.args[ 0 ], right_assoc ? prec + 1 : prec, out );
    switch ( f.kind )
    {
    case K::Implies: out += " -> "; break;
    case K::Or: out += " || "; break;
    case K::And: out += " && "; break;
    case K::Until: out += " U "; break;
    default: out += " R "; break;
    }
    render_ltl_operand( f.args[ 1 ], right_assoc ? prec : prec + 1, out );
}

} // namespace detail

inline std::string render_ltl( const Formula& f )
{
    std::string out;
    detail::render_ltl_into( f, out );
    return out;
}

// ---------------------------------------------------------------------------
// Parsing

namespace detail
{

inline bool is_temporal_keyword( const Token& t )
{
    return t.kind == TokenKind::Identifier && ( t.text == "G" || t.text == "F" || t.text == "X" );
}

inline bool continues_expression( const Token& t )
{
    if ( t.kind == TokenKind::Identifier )
        return t.text == "mod";
    if ( t.kind != TokenKind::Punct )
        return false;
    for ( const char* op : { "==", "!=", "<", "<=", ">", ">=", "+", "-", "*", "%" } )
        if ( t.text == op )
            return true;
    return false;
}

inline Formula parse_ltl_implies( TokenCursor& cur );

inline Formula parse_ltl_primary( TokenCursor& cur )
{
    if ( cur.accept( "true" ) )
        return ltl::tt();
    if ( cur.accept( "false" ) )
        return ltl::ff();
    if ( cur.peek().is( "(" ) )
    {
        // A parenthesis opens either a subformula or an arithmetic term of an atom
        // such as `(x + 1) < 2`; try the former, fall back to the latter.
        const auto start = cur.mark();
        try
        {
            cur.next();
            Formula inner = parse_ltl_implies( cur );
            cur.expect( ")" );
            if ( !continues_expression( cur.peek() ) )
                return inner;
        }
        catch ( const ParseError& first )
        {
            cur.reset( start );
            try
            {
                return ltl::atom( parse_comparison( cur ) );
            }
            catch ( const ParseError& )
            {
                throw first;
            }
        }
        cur.reset( start );
        return ltl::atom( parse_comparison( cur ) );
    }
    const Token& t = cur.peek();
    if ( t.kind == TokenKind::Identifier && ( t.text == "U" || t.text == "R" ) )
        cur.fail( "expected formula" );
    if ( t.kind != TokenKind::Identifier && t.kind != TokenKind::Integer && !t.is( "-" ) )
        cur.fail( "expected formula" );
    return ltl::atom( parse_comparison( cur ) );
}

inline Formula parse_ltl_unary( TokenCursor& cur )
{
    if ( cur.accept( "!" ) )
        return ltl::neg( parse_ltl_unary( cur ) );
    if ( is_temporal_keyword( cur.peek() ) )
    {
        const std::string op = cur.next().text;
        Formula a = parse_ltl_unary( cur );
        return op == "G" ? ltl::globally( std::move( a ) ) : op == "F" ? ltl::finally( std::move( a ) ) : ltl::next( std::move( a ) );
    }
    return parse_ltl_primary( cur );
}

inline Formula parse_ltl_until( TokenCursor& cur )
{
    Formula lhs = parse_ltl_unary( cur );
    if ( cur.accept( "U" ) )
        return ltl::until( std::move( lhs ), parse_ltl_until( cur ) );
    if ( cur.accept( "R" ) )
        return ltl::release( std::move( lhs ), parse_ltl_until( cur ) );
    return lhs;
}

inline Formula parse_ltl_and( TokenCursor& cur )
{
    Formula lhs = parse_ltl_until( cur );
    while ( cur.accept( "&&" ) )
        lhs = ltl::conj( std::move( lhs ), parse_ltl_until( cur ) );
    return lhs;
}

inline Formula parse_ltl_or( TokenCursor& cur )
{
    Formula lhs = parse_ltl_and( cur );
    while ( cur.accept( "||" ) )
        lhs = ltl::disj( std::move( lhs ), parse_ltl_and( cur ) );
    return lhs;
}

inline Formula parse_ltl_implies( TokenCursor& cur )
{
    Formula lhs = parse_ltl_or( cur );
    if ( cur.accept( "->" ) )
        return ltl::implies( std::move( lhs ), parse_ltl_implies( cur ) );
    return lhs;
}

} // namespace detail

inline Formula parse_ltl( std::string_view text )
{
    TokenCursor cur( tokenize( text ) );
    Formula f = detail::parse_ltl_implies( cur );
    if ( !cur.at_end() )
        cur.fail( "unexpected trailing input" );
    return f;
}

// ---------------------------------------------------------------------------
// Negation normal form

namespace detail
{

// Complement of a comparison atom as a comparison (`c < 2` becomes `c >= 2`), or
// a plain Not when the atom is not a comparison.
inline Formula negate_atom( const Formula& a )
{
    const Expr& e = a.atom;
    if ( e.kind == Expr::Kind::Binary )
    {
        Op flipped;
        switch ( e.op )
        {
        case Op::Lt: flipped = Op::Ge; break;
        case Op::Ge: flipped = Op::Lt; break;
        case Op::Le: flipped = Op::Gt; break;
        case Op::Gt: flipped = Op::Le; break;
        case Op::Eq: flipped = Op::Ne; break;
        case Op::Ne: flipped = Op::Eq; break;
        default: return ltl::neg( a );
        }
        return ltl::atom( expr::binary( flipped, e.args[ 0 ], e.args[ 1 ] ) );
    }
    return ltl::neg( a );
}

} // namespace detail

// Pushes negations down to atoms and removes ->. The result uses only True, False,
// Atom, Not(Atom), And, Or, Next, Globally, Finally, Until and Release.
inline Formula to_nnf( const Formula& f, bool negated = false )
{
    using K = Formula::Kind;
    switch ( f.kind )
    {
    case K::True: return negated ? ltl::ff() : ltl::tt();
    case K::False: return negated ? ltl::tt() : ltl::ff();
    case K::Atom: return negated ? detail::negate_atom( f ) : f;
    case K::Not: return to_nnf( f.args[ 0 ], !negated );
    case K::And:
    case K::Or:
    {
        Formula a = to_nnf( f.args[ 0 ], negated ), b = to_nnf( f.args[ 1 ], negated );
        return ( f.kind == K::And ) != negated ? ltl::conj( std::move( a ), std::move( b ) ) : ltl::disj( std::move( a ), std::move( b ) );
    }
    case K::Implies:
        return to_nnf( ltl::disj( ltl::neg( f.args[ 0 ] ), f.args[ 1 ] ), negated );
    case K::Next: return ltl::next( to_nnf( f.args[ 0 ], negated ) );
    case K::Globally:
        return negated ? ltl::finally( to_nnf( f.args[ 0 ], true ) ) : ltl::globally( to_nnf( f.args[ 0 ] ) );
    case K::Finally:
        return negated ? ltl::globally( to_nnf( f.args[ 0 ], true ) ) : ltl::finally( to_nnf( f.args[ 0 ] ) );
    case K::Until:
    case K::Release:
    {
        Formula a = to_nnf( f.args[ 0 ], negated ), b = to_nnf( f.args[ 1 ], negated );
        return ( f.kind == K::Until ) != negated ? ltl::until( std::move( a ), std::move( b ) ) : ltl::release( std::move( a ), std::move( b ) );
    }
    }
    return f;
}

inline void collect_atoms( const Formula& f, std::vector< Expr >& out )
{
    if ( f.kind == Formula::Kind::Atom )
    {
        for ( const auto& e : out )
            if ( e == f.atom )
                return;
        out.push_back( f.atom );
    }
    for ( const auto& a : f.args )
        collect_atoms( a, out );
}

} // namespace tickcheck
