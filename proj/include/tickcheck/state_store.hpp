#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <functional>
#include <span>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

namespace tickcheck
{

// Exact set of fixed-width state vectors. States live contiguously in one pool and
// are identified by insertion index; the hash set holds indices only and compares
// full vectors on collision.
class StateStore
{
public:
    using Id = std::uint32_t;

private:
    struct Hash
    {
        const StateStore* store;
        std::size_t operator()( Id id ) const
        {
            const auto s = store->get( id );
            return std::hash< std::string_view >{}(
                    std::string_view( reinterpret_cast< const char* >( s.data() ), s.size_bytes() ) );
        }
    };

    struct Equal
    {
        const StateStore* store;
        bool operator()( Id a, Id b ) const
        {
            const auto x = store->get( a );
            const auto y = store->get( b );
            return std::equal( x.begin(), x.end(), y.begin() );
        }
    };

    std::size_t _width;
    std::vector< std::uint16_t > _pool;
    std::unordered_set< Id, Hash, Equal > _index;

public:
    explicit StateStore( std::size_t width )
            : _width{ width }, _index( 1024, Hash{ this }, Equal{ this } )
    {
    }

    StateStore( const StateStore& ) = delete;
    StateStore& operator=( const StateStore& ) = delete;

    [[nodiscard]] std::size_t width() const { return _width; }
    [[nodiscard]] std::size_t size() const { return _width == 0 ? _index.size() : _pool.size() / _width; }

    [[nodiscard]] std::span< const std::uint16_t > get( Id id ) const
    {
        return { _pool.data() + static_cast< std::size_t >( id ) * _width, _width };
    }

    // Inserts `state` unless an equal vector is present. Returns (id, inserted).
    // `state` must not alias the pool.
    std::pair< Id, bool > insert( std::span< const std::uint16_t > state )
    {
        const Id candidate = static_cast< Id >( _pool.size() / ( _width == 0 ? 1 : _width ) );
        _pool.insert( _pool.end(), state.begin(), state.end() );
        if ( _width == 0 )
        {
            auto [ it, inserted ] = _index.insert( 0 );
            return { *it, inserted };
        }
        auto [ it, inserted ] = _index.insert( candidate );
        if ( !inserted )
            _pool.resize( _pool.size() - _width );
        return { *it, inserted };
    }

    // Non-const: the probe is staged at the end of the pool while hashing.
    [[nodiscard]] std::optional< Id > find( std::span< const std::uint16_t > state )
    {
        const Id candidate = static_cast< Id >( _pool.size() / ( _width == 0 ? 1 : _width ) );
        _pool.insert( _pool.end(), state.begin(), state.end() );
        auto it = _index.find( candidate );
        _pool.resize( _pool.size() - _width );
        if ( it == _index.end() )
            return std::nullopt;
        return *it;
    }
};

} // namespace tickcheck
