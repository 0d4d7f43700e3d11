#pragma once

#include "errors.hpp"
#include "lexer.hpp"

#include <algorithm>
#include <cstdint>
#include <functional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace tickcheck
{

enum class Op
{
    Neg,
    Not,
    Add,
    Sub,
    Mul,
    Mod,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
};

// Integer/boolean expression tree. Booleans are integers (0 false, anything else true)
// so comparisons can be used arithmetically, e.g. `ub - (ub != 65535)`.
struct Expr
{
    enum class Kind
    {
        Literal,
        Variable,
        Unary,
        Binary,
    };

    Kind kind = Kind::Literal;
    std::int64_t value = 0;
    std::string name;
    Op op = Op::Add;
    std::vector< Expr > args;

    friend bool operator==( const Expr&, const Expr& ) = default;
};

namespace expr
{

inline Expr lit( std::int64_t v )
{
    Expr e;
    e.kind = Expr::Kind::Literal;
    e.value = v;
    return e;
}

inline Expr var( std::string name )
{
    Expr e;
    e.kind = Expr::Kind::Variable;
    e.name = std::move( name );
    return e;
}

inline Expr unary( Op op, Expr a )
{
    Expr e;
    e.kind = Expr::Kind::Unary;
    e.op = op;
    e.args.push_back( std::move( a ) );
    return e;
}

inline Expr binary( Op op, Expr a, Expr b )
{
    Expr e;
    e.kind = Expr::Kind::Binary;
    e.op = op;
    e.args.push_back( std::move( a ) );
    e.args.push_back( std::move( b ) );
    return e;
}

// Left-folded conjunction; the empty conjunction is the literal 1.
inline Expr conjunction( std::vector< Expr > parts )
{
    if ( parts.empty() )
        return lit( 1 );
    Expr acc = std::move( parts.front() );
    for ( std::size_t i = 1; i < parts.size(); ++i )
        acc = binary( Op::And, std::move( acc ), std::move( parts[ i ] ) );
    return acc;
}

} // namespace expr

inline int precedence( Op op )
{
    switch ( op )
    {
    case Op::Or: return 1;
    case Op::And: return 2;
    case Op::Eq:
    case Op::Ne: return 3;
    case Op::Lt:
    case Op::Le:
    case Op::Gt:
    case Op::Ge: return 4;
    case Op::Add:
    case Op::Sub: return 5;
    case Op::Mul:
    case Op::Mod: return 6;
    case Op::Neg:
    case Op::Not: return 7;
    }
    return 0;
}

inline const char* op_symbol( Op op )
{
    switch ( op )
    {
    case Op::Neg: return "-";
    case Op::Not: return "!";
    case Op::Add: return "+";
    case Op::Sub: return "-";
    case Op::Mul: return "*";
    case Op::Mod: return "%";
    case Op::Eq: return "==";
    case Op::Ne: return "!=";
    case Op::Lt: return "<";
    case Op::Le: return "<=";
    case Op::Gt: return ">";
    case Op::Ge: return ">=";
    case Op::And: return "&&";
    case Op::Or: return "||";
    }
    return "?";
}

namespace detail
{

inline int node_precedence( const Expr& e )
{
    switch ( e.kind )
    {
    case Expr::Kind::Literal:
    case Expr::Kind::Variable: return 8;
    default: return precedence( e.op );
    }
}

inline void render_into( const Expr& e, std::string& out )
{
    switch ( e.kind )
    {
    case Expr::Kind::Literal: out += std::to_string( e.value ); return;
    case Expr::Kind::Variable: out += e.name; return;
    case Expr::Kind::Unary:
    {
        out += op_symbol( e.op );
        const bool paren = node_precedence( e.args[ 0 ] ) < precedence( e.op );
        if ( paren )
            out += '(';
        render_into( e.args[ 0 ], out );
        if ( paren )
            out += ')';
        return;
    }
    case Expr::Kind::Binary:
    {
        const int p = precedence( e.op );
        const bool lparen = node_precedence( e.args[ 0 ] ) < p;
        const bool rparen = node_precedence( e.args[ 1 ] ) <= p;
        if ( lparen )
            out += '(';
        render_into( e.args[ 0 ], out );
        if ( lparen )
            out += ')';
        out += ' ';
        out += op_symbol( e.op );
        out += ' ';
        if ( rparen )
            out += '(';
        render_into( e.args[ 1 ], out );
        if ( rparen )
            out += ')';
        return;
    }
    }
}

} // namespace detail

// Minimal-parenthesis rendering; parse_expr(render(e)) == e for non-negative literals.
inline std::string render( const Expr& e )
{
    std::string out;
    detail::render_into( e, out );
    return out;
}

inline void collect_variables( const Expr& e, std::set< std::string >& out )
{
    if ( e.kind == Expr::Kind::Variable )
        out.insert( e.name );
    for ( const auto& a : e.args )
        collect_variables( a, out );
}

// Rewrites every variable reference through `rename`.
inline Expr rename_variables( Expr e, const std::function< std::string( const std::string& ) >& rename )
{
    if ( e.kind == Expr::Kind::Variable )
        e.name = rename( e.name );
    for ( auto& a : e.args )
        a = rename_variables( std::move( a ), rename );
    return e;
}

// ---------------------------------------------------------------------------
// Parsing (C precedence: || < && < == != < relational < + - < * % < unary)

namespace detail
{

inline bool binary_op_at( const Token& t, int level, Op& op )
{
    if ( t.kind != TokenKind::Punct && !( t.kind == TokenKind::Identifier && t.text == "mod" ) )
        return false;
    struct Entry
    {
        const char* text;
        Op op;
    };
    static constexpr Entry table[] = {
        { "||", Op::Or }, { "&&", Op::And }, { "==", Op::Eq }, { "!=", Op::Ne }, { "<", Op::Lt },
        { "<=", Op::Le }, { ">", Op::Gt },   { ">=", Op::Ge }, { "+", Op::Add }, { "-", Op::Sub },
        { "*", Op::Mul }, { "%", Op::Mod },  { "mod", Op::Mod },
    };
    for ( const auto& entry : table )
    {
        if ( t.text == entry.text && precedence( entry.op ) == level )
        {
            op = entry.op;
            return true;
        }
    }
    return false;
}

inline Expr parse_level( TokenCursor& cur, int level );

inline Expr parse_primary( TokenCursor& cur )
{
    const Token& t = cur.peek();
    if ( t.is( "-" ) )
    {
        cur.next();
        return expr::unary( Op::Neg, parse_primary( cur ) );
    }
    if ( t.is( "!" ) )
    {
        cur.next();
        return expr::unary( Op::Not, parse_primary( cur ) );
    }
    if ( t.is( "(" ) )
    {
        cur.next();
        Expr inner = parse_level( cur, 1 );
        cur.expect( ")" );
        return inner;
    }
    if ( t.kind == TokenKind::Integer )
        return expr::lit( cur.expect_integer() );
    if ( t.is( "true" ) )
    {
        cur.next();
        return expr::lit( 1 );
    }
    if ( t.is( "false" ) )
    {
        cur.next();
        return expr::lit( 0 );
    }
    if ( t.kind == TokenKind::Identifier )
        return expr::var( cur.next().text );
    cur.fail( "expected expression" );
}

inline Expr parse_level( TokenCursor& cur, int level )
{
    if ( level > 6 )
        return parse_primary( cur );
    Expr lhs = parse_level( cur, level + 1 );
    Op op;
    while ( binary_op_at( cur.peek(), level, op ) )
    {
        cur.next();
        Expr rhs = parse_level( cur, level + 1 );
        lhs = expr::binary( op, std::move( lhs ), std::move( rhs ) );
    }
    return lhs;
}

} // namespace detail

// Parses one expression starting at the cursor; stops at the first token that
// cannot continue it.
inline Expr parse_expr( TokenCursor& cur ) { return detail::parse_level( cur, 1 ); }

// Relational-level expression: arithmetic and comparisons but no && / ||.
// Used for formula atoms, where the boolean connectives belong to the formula.
inline Expr parse_comparison( TokenCursor& cur ) { return detail::parse_level( cur, 3 ); }

inline Expr parse_expr( std::string_view text )
{
    TokenCursor cur( tokenize( text ) );
    Expr e = parse_expr( cur );
    if ( !cur.at_end() )
        cur.fail( "unexpected trailing input" );
    return e;
}

// ---------------------------------------------------------------------------
// Evaluation over a flat slot vector

// Expression with variable names resolved to slot indices and flattened to postfix
// code. Short-circuit && / || are compiled to jumps so `x != 0 && y % x == 0` is safe.
class CompiledExpr
{
public:
    enum class Code : std::uint8_t
    {
        Const,
        Load,
        Neg,
        Not,
        Add,
        Sub,
        Mul,
        Mod,
        Eq,
        Ne,
        Lt,
        Le,
        Gt,
        Ge,
        JumpIfFalse, // pops; jumps when zero
        JumpIfTrue,  // pops; jumps when nonzero
        Jump,
        Bool,        // normalizes top to 0/1
    };

    struct Instr
    {
        Code code;
        std::int64_t arg;
    };

private:
    static constexpr std::size_t max_stack = 64;
    std::vector< Instr > _code;

    void emit( Code c, std::int64_t arg = 0 ) { _code.push_back( { c, arg } ); }

    template < typename Resolve >
    void compile( const Expr& e, const Resolve& resolve )
    {
        switch ( e.kind )
        {
        case Expr::Kind::Literal: emit( Code::Const, e.value ); return;
        case Expr::Kind::Variable: emit( Code::Load, static_cast< std::int64_t >( resolve( e.name ) ) ); return;
        case Expr::Kind::Unary:
            compile( e.args[ 0 ], resolve );
            emit( e.op == Op::Neg ? Code::Neg : Code::Not );
            return;
        case Expr::Kind::Binary: break;
        }

        if ( e.op == Op::And || e.op == Op::Or )
        {
            // a && b:  [a] JF L0 [b] Bool J L1 ; L0: Const 0 ; L1:
            const bool is_and = e.op == Op::And;
            compile( e.args[ 0 ], resolve );
            const std::size_t short_jump = _code.size();
            emit( is_and ? Code::JumpIfFalse : Code::JumpIfTrue );
            compile( e.args[ 1 ], resolve );
            emit( Code::Bool );
            const std::size_t end_jump = _code.size();
            emit( Code::Jump );
            _code[ short_jump ].arg = static_cast< std::int64_t >( _code.size() );
            emit( Code::Const, is_and ? 0 : 1 );
            _code[ end_jump ].arg = static_cast< std::int64_t >( _code.size() );
            return;
        }

        compile( e.args[ 0 ], resolve );
        compile( e.args[ 1 ], resolve );
        switch ( e.op )
        {
        case Op::Add: emit( Code::Add ); break;
        case Op::Sub: emit( Code::Sub ); break;
        case Op::Mul: emit( Code::Mul ); break;
        case Op::Mod: emit( Code::Mod ); break;
        case Op::Eq: emit( Code::Eq ); break;
        case Op::Ne: emit( Code::Ne ); break;
        case Op::Lt: emit( Code::Lt ); break;
        case Op::Le: emit( Code::Le ); break;
        case Op::Gt: emit( Code::Gt ); break;
        case Op::Ge: emit( Code::Ge ); break;
        default: break;
        }
    }

public:
    CompiledExpr() { emit( Code::Const, 1 ); }

    // `resolve` maps a variable name to its slot index (and throws for unknown names).
    template < typename Resolve >
    CompiledExpr( const Expr& e, const Resolve& resolve )
    {
        compile( e, resolve );
        std::size_t depth = 0, max_depth = 0;
        for ( const auto& in : _code )
        {
            if ( in.code == Code::Const || in.code == Code::Load )
                max_depth = std::max( max_depth, ++depth );
            else if ( in.code >= Code::Add && in.code <= Code::JumpIfTrue && depth > 0 )
                --depth;
        }
        if ( max_depth > max_stack )
            throw ValidationError( "expression nesting too deep: " + render( e ) );
    }

    [[nodiscard]] bool is_constant_true() const
    {
        return _code.size() == 1 && _code[ 0 ].code == Code::Const && _code[ 0 ].arg != 0;
    }

    [[nodiscard]] std::int64_t eval( std::span< const std::uint16_t > slots ) const
    {
        std::int64_t stack[ max_stack ];
        std::size_t sp = 0;
        std::size_t pc = 0;
        while ( pc < _code.size() )
        {
            const Instr& in = _code[ pc++ ];
            switch ( in.code )
            {
            case Code::Const: stack[ sp++ ] = in.arg; break;
            case Code::Load: stack[ sp++ ] = slots[ static_cast< std::size_t >( in.arg ) ]; break;
            case Code::Neg: stack[ sp - 1 ] = -stack[ sp - 1 ]; break;
            case Code::Not: stack[ sp - 1 ] = stack[ sp - 1 ] == 0; break;
            case Code::Bool: stack[ sp - 1 ] = stack[ sp - 1 ] != 0; break;
            case Code::JumpIfFalse:
                if ( stack[ --sp ] == 0 )
                    pc = static_cast< std::size_t >( in.arg );
                break;
            case Code::JumpIfTrue:
                if ( stack[ --sp ] != 0 )
                    pc = static_cast< std::size_t >( in.arg );
                break;
            case Code::Jump: pc = static_cast< std::size_t >( in.arg ); break;
            default:
            {
                const std::int64_t b = stack[ --sp ];
                std::int64_t& a = stack[ sp - 1 ];
                switch ( in.code )
                {
                case Code::Add: a = a + b; break;
                case Code::Sub: a = a - b; break;
                case Code::Mul: a = a * b; break;
                case Code::Mod:
                    if ( b == 0 )
                        throw EvaluationError( "modulo by zero" );
                    a = a % b;
                    break;
                case Code::Eq: a = a == b; break;
                case Code::Ne: a = a != b; break;
                case Code::Lt: a = a < b; break;
                case Code::Le: a = a <= b; break;
                case Code::Gt: a = a > b; break;
                case Code::Ge: a = a >= b; break;
                default: break;
                }
            }
            }
        }
        return stack[ 0 ];
    }

    [[nodiscard]] bool holds( std::span< const std::uint16_t > slots ) const { return eval( slots ) != 0; }
};

} // namespace tickcheck
