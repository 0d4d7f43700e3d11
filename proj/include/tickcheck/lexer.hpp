#pragma once

#include "errors.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace tickcheck
{

enum class TokenKind
{
    Identifier,
    Integer,
    Punct,
    End,
};

struct Token
{
    TokenKind kind = TokenKind::End;
    std::string text;
    SourcePos pos;

    [[nodiscard]] bool is( std::string_view punct_or_word ) const
    {
        return kind != TokenKind::End && kind != TokenKind::Integer && text == punct_or_word;
    }
};

struct LexerOptions
{
    bool hash_comments = false;    // '#' to end of line
    bool slash_comments = true;    // '//' and '/* */'
};

// Splits text into identifiers, decimal integers and the operator set shared by
// the model, formula and skeleton grammars. Always ends with an End token.
inline std::vector< Token > tokenize( std::string_view src, LexerOptions opts = {} )
{
    static constexpr std::string_view two_char[] = { "->", "==", "!=", "<=", ">=", "&&", "||", ":=" };
    static constexpr std::string_view one_char = "+-*%<>=!(){},;?:.[]/";

    std::vector< Token > out;
    std::size_t i = 0;
    SourcePos pos;

    auto advance = [ & ]( std::size_t n ) {
        for ( std::size_t k = 0; k < n && i < src.size(); ++k, ++i )
        {
            if ( src[ i ] == '\n' )
            {
                ++pos.line;
                pos.column = 1;
            }
            else
                ++pos.column;
        }
    };

    while ( i < src.size() )
    {
        const char c = src[ i ];
        if ( std::isspace( static_cast< unsigned char >( c ) ) )
        {
            advance( 1 );
            continue;
        }
        if ( opts.hash_comments && c == '#' )
        {
            while ( i < src.size() && src[ i ] != '\n' )
                advance( 1 );
            continue;
        }
        if ( opts.slash_comments && c == '/' && i + 1 < src.size() && src[ i + 1 ] == '/' )
        {
            while ( i < src.size() && src[ i ] != '\n' )
                advance( 1 );
            continue;
        }
        if ( opts.slash_comments && c == '/' && i + 1 < src.size() && src[ i + 1 ] == '*' )
        {
            const SourcePos start = pos;
            advance( 2 );
            while ( i < src.size() && !( src[ i ] == '*' && i + 1 < src.size() && src[ i + 1 ] == '/' ) )
                advance( 1 );
            if ( i >= src.size() )
                throw ParseError( start, "unterminated comment" );
            advance( 2 );
            continue;
        }

        Token tok;
        tok.pos = pos;
        if ( std::isalpha( static_cast< unsigned char >( c ) ) || c == '_' )
        {
            std::size_t j = i;
            while ( j < src.size() && ( std::isalnum( static_cast< unsigned char >( src[ j ] ) ) || src[ j ] == '_' ) )
                ++j;
            tok.kind = TokenKind::Identifier;
            tok.text = std::string( src.substr( i, j - i ) );
            advance( j - i );
        }
        else if ( std::isdigit( static_cast< unsigned char >( c ) ) )
        {
            std::size_t j = i;
            while ( j < src.size() && std::isdigit( static_cast< unsigned char >( src[ j ] ) ) )
                ++j;
            if ( j - i > 18 )
                throw ParseError( pos, "integer literal too large" );
            tok.kind = TokenKind::Integer;
            tok.text = std::string( src.substr( i, j - i ) );
            advance( j - i );
        }
        else
        {
            bool matched = false;
            for ( auto op : two_char )
            {
                if ( src.substr( i, 2 ) == op )
                {
                    tok.kind = TokenKind::Punct;
                    tok.text = std::string( op );
                    advance( 2 );
                    matched = true;
                    break;
                }
            }
            if ( !matched )
            {
                if ( one_char.find( c ) == std::string_view::npos )
                    throw ParseError( pos, std::string( "unexpected character '" ) + c + "'" );
                tok.kind = TokenKind::Punct;
                tok.text = std::string( 1, c );
                advance( 1 );
            }
        }
        out.push_back( std::move( tok ) );
    }

    Token end;
    end.kind = TokenKind::End;
    end.pos = pos;
    out.push_back( end );
    return out;
}

// Cursor over a token vector with the expect/accept helpers every parser here uses.
class TokenCursor
{
    std::vector< Token > _tokens;
    std::size_t _at = 0;

public:
    explicit TokenCursor( std::vector< Token > tokens ) : _tokens{ std::move( tokens ) } {}

    [[nodiscard]] const Token& peek( std::size_t ahead = 0 ) const
    {
        return _tokens[ std::min( _at + ahead, _tokens.size() - 1 ) ];
    }
    [[nodiscard]] bool at_end() const { return peek().kind == TokenKind::End; }
    [[nodiscard]] std::size_t mark() const { return _at; }
    void reset( std::size_t mark ) { _at = mark; }

    const Token& next()
    {
        const Token& t = peek();
        if ( _at < _tokens.size() - 1 )
            ++_at;
        return t;
    }

    bool accept( std::string_view text )
    {
        if ( peek().is( text ) )
        {
            next();
            return true;
        }
        return false;
    }

    const Token& expect( std::string_view text )
    {
        if ( !peek().is( text ) )
            fail( "expected '" + std::string( text ) + "'" );
        return next();
    }

    std::string expect_identifier( std::string_view what = "identifier" )
    {
        if ( peek().kind != TokenKind::Identifier )
            fail( "expected " + std::string( what ) );
        return next().text;
    }

    std::int64_t expect_integer()
    {
        if ( peek().kind != TokenKind::Integer )
            fail( "expected integer" );
        return std::stoll( next().text );
    }

    [[noreturn]] void fail( const std::string& what ) const
    {
        const Token& t = peek();
        const std::string found = t.kind == TokenKind::End ? "end of input" : "'" + t.text + "'";
        throw ParseError( t.pos, what + ", found " + found );
    }
};

} // namespace tickcheck
