#pragma once

// Fischer's mutual exclusion as a timed skeleton, the experiment grid over it, and
// table output (markdown and CSV).
//
// Thread t runs
//   ncs: skip                            (untimed, may idle)
//   a:   await x == 0                    (step b due within delta)
//   b:   x := t                          (step c due in [eps, eps_upper] + margin)
//   c:   if x != t goto a else c := c+1  (enter cs)
//   d:   c := c-1; x := 0; goto ncs
// and mutual exclusion is G(c < 2).

#include "tickcheck/explorer.hpp"
#include "tickcheck/ltl.hpp"
#include "tickcheck/ltl_check.hpp"
#include "tickcheck/skeleton.hpp"
#include "tickcheck/time_gen.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#if defined( __unix__ ) || defined( __APPLE__ )
#include <sys/resource.h>
#endif

namespace tickcheck
{

struct FischerConfig
{
    std::size_t n_threads = 2;
    std::int64_t T = 1;
    Method method = Method::LEDM;
    Algorithm algorithm = Algorithm::NestedDFS;
    std::optional< std::int64_t > delta, epsilon, epsilon_upper; // default T
    // Ticks added to both ends of step c's window. Tick counts bound real delays
    // only to within one tick, and under SEDM a process may run one tick ahead of
    // another, so delta == eps needs 1 extra tick (LEDM) or 2 (SEDM) to stay safe.
    std::int64_t margin = 2;

    [[nodiscard]] std::int64_t d() const { return delta.value_or( T ); }
    [[nodiscard]] std::int64_t e() const { return epsilon.value_or( T ); }
    [[nodiscard]] std::int64_t eu() const { return epsilon_upper.value_or( T ); }
};

inline void validate_fischer( const FischerConfig& cfg )
{
    if ( cfg.n_threads < 1 )
        throw ValidationError( "need at least one thread" );
    if ( cfg.T < 1 )
        throw ValidationError( "T must be at least 1" );
    if ( cfg.d() < 0 || cfg.e() < 0 || cfg.eu() < cfg.e() || cfg.margin < 0 )
        throw ValidationError( "need 0 <= delta, 0 <= epsilon <= epsilon_upper and margin >= 0" );
}

inline TimedSkeleton fischer_skeleton( const FischerConfig& cfg )
{
    validate_fischer( cfg );
    const auto c_lb = std::to_string( cfg.e() + cfg.margin );
    const auto c_ub = std::to_string( cfg.eu() + cfg.margin );
    std::string text = "shared x = 0\nshared c = 0\n";
    for ( std::size_t i = 1; i <= cfg.n_threads; ++i )
    {
        text += "process T" + std::to_string( i ) + " init ncs\n";
        text += "var t = " + std::to_string( i ) + "\n";
        text += "timer tb\ntimer tc\n";
        text += "edge ncs -> a\n";
        text += "edge a -> b set tb 0 " + std::to_string( cfg.d() ) + " guard x == 0\n";
        text += "edge b -> c within tb set tc " + c_lb + " " + c_ub + " effect x = t\n";
        text += "edge c -> a within tc guard x != t\n";
        text += "edge c -> cs within tc guard x == t effect c = c + 1\n";
        text += "edge cs -> ncs effect c = c - 1, x = 0\n";
    }
    return parse_skeleton( text );
}

inline Formula fischer_property() { return parse_ltl( "G(c < 2)" ); }

inline std::pair< Model, Formula > build_fischer( const FischerConfig& cfg )
{
    return { generate( fischer_skeleton( cfg ), cfg.method ), fischer_property() };
}

// ---------------------------------------------------------------------------
// Experiment grid

struct BenchmarkRecord
{
    FischerConfig config;
    std::size_t product_states = 0;
    std::size_t system_states = 0;
    std::size_t transitions = 0; // product transitions
    double wall_time = 0;        // seconds, check only
    double peak_memory_mb = -1;  // process high-water mark; -1 when unavailable
    std::optional< bool > verdict; // empty when a limit was hit
    std::string error;
};

inline double peak_memory_mb()
{
#if defined( __unix__ ) || defined( __APPLE__ )
    rusage ru{};
    if ( getrusage( RUSAGE_SELF, &ru ) == 0 )
    {
#if defined( __APPLE__ )
        return static_cast< double >( ru.ru_maxrss ) / ( 1024.0 * 1024.0 );
#else
        return static_cast< double >( ru.ru_maxrss ) / 1024.0;
#endif
    }
#endif
    return -1;
}

struct BenchOptions
{
    std::optional< std::size_t > max_states;
};

inline BenchmarkRecord run_one( const FischerConfig& cfg, const BenchOptions& opts = {} )
{
    BenchmarkRecord r;
    r.config = cfg;
    try
    {
        const auto [ model, formula ] = build_fischer( cfg );
        const CompiledModel m( model );
        ExploreOptions eo;
        eo.max_states = opts.max_states;
        r.system_states = explore_reachable( m, eo ).state_count;
        CheckOptions co;
        co.max_states = opts.max_states;
        const auto start = std::chrono::steady_clock::now();
        const auto result = verify( m, formula, cfg.algorithm, co );
        r.wall_time = std::chrono::duration< double >( std::chrono::steady_clock::now() - start ).count();
        r.product_states = result.stats.states;
        r.transitions = result.stats.transitions;
        r.verdict = result.verdict.holds;
    }
    catch ( const LimitExceeded& e )
    {
        r.error = e.what();
    }
    r.peak_memory_mb = peak_memory_mb();
    return r;
}

inline bool record_order( const BenchmarkRecord& a, const BenchmarkRecord& b )
{
    auto key = []( const BenchmarkRecord& r ) {
        return std::tuple( r.config.T, static_cast< int >( r.config.method ), r.config.n_threads,
                           static_cast< int >( r.config.algorithm ) );
    };
    return key( a ) < key( b );
}

inline std::vector< BenchmarkRecord > run_benchmark( const std::vector< FischerConfig >& grid, const BenchOptions& opts = {} )
{
    std::vector< BenchmarkRecord > out;
    for ( const auto& cfg : grid )
        out.push_back( run_one( cfg, opts ) );
    std::stable_sort( out.begin(), out.end(), record_order );
    return out;
}

// ---------------------------------------------------------------------------
// Output

namespace detail
{

inline std::string shortest( double v )
{
    char buf[ 64 ];
    auto [ end, ec ] = std::to_chars( buf, buf + sizeof buf, v );
    return ec == std::errc{} ? std::string( buf, end ) : std::to_string( v );
}

inline std::string fixed( double v, int digits )
{
    char buf[ 64 ];
    auto [ end, ec ] = std::to_chars( buf, buf + sizeof buf, v, std::chars_format::fixed, digits );
    return ec == std::errc{} ? std::string( buf, end ) : std::to_string( v );
}

inline std::string verdict_text( const BenchmarkRecord& r )
{
    return r.verdict ? ( *r.verdict ? "true" : "false" ) : "limit";
}

inline std::string csv_field( const std::string& s )
{
    if ( s.find_first_of( ",\"\r\n" ) == std::string::npos )
        return s;
    std::string out = "\"";
    for ( char c : s )
        out += c == '"' ? std::string( "\"\"" ) : std::string( 1, c );
    return out + "\"";
}

} // namespace detail

inline const std::vector< std::string >& csv_columns()
{
    static const std::vector< std::string > cols = { "method",      "T",           "threads", "algorithm",
                                                     "product_states", "system_states", "transitions",
                                                     "time_s",      "peak_mem_mb", "verdict" };
    return cols;
}

inline std::string emit_csv( std::vector< BenchmarkRecord > records )
{
    std::stable_sort( records.begin(), records.end(), record_order );
    std::string out;
    for ( std::size_t i = 0; i < csv_columns().size(); ++i )
        out += ( i ? "," : "" ) + csv_columns()[ i ];
    out += "\r\n";
    for ( const auto& r : records )
    {
        const std::vector< std::string > row = {
            method_name( r.config.method ),       std::to_string( r.config.T ),
            std::to_string( r.config.n_threads ), algorithm_name( r.config.algorithm ),
            std::to_string( r.product_states ),   std::to_string( r.system_states ),
            std::to_string( r.transitions ),      detail::shortest( r.wall_time ),
            detail::shortest( r.peak_memory_mb ), detail::verdict_text( r ) };
        for ( std::size_t i = 0; i < row.size(); ++i )
            out += ( i ? "," : "" ) + detail::csv_field( row[ i ] );
        out += "\r\n";
    }
    return out;
}

// RFC 4180 rows; accepts CRLF or LF line ends.
inline std::vector< std::vector< std::string > > parse_csv_rows( std::string_view text )
{
    std::vector< std::vector< std::string > > rows;
    std::vector< std::string > row;
    std::string field;
    bool quoted = false, any = false;
    for ( std::size_t i = 0; i < text.size(); ++i )
    {
        const char c = text[ i ];
        if ( quoted )
        {
            if ( c == '"' && i + 1 < text.size() && text[ i + 1 ] == '"' )
                field += '"', ++i;
            else if ( c == '"' )
                quoted = false;
            else
                field += c;
            continue;
        }
        if ( c == '"' )
            quoted = any = true;
        else if ( c == ',' )
        {
            row.push_back( std::move( field ) );
            field.clear();
            any = true;
        }
        else if ( c == '\n' || c == '\r' )
        {
            if ( c == '\r' && i + 1 < text.size() && text[ i + 1 ] == '\n' )
                ++i;
            if ( any || !field.empty() )
            {
                row.push_back( std::move( field ) );
                rows.push_back( std::move( row ) );
            }
            field.clear();
            row.clear();
            any = false;
        }
        else
        {
            field += c;
            any = true;
        }
    }
    if ( quoted )
        throw std::invalid_argument( "unterminated quoted CSV field" );
    if ( any || !field.empty() )
    {
        row.push_back( std::move( field ) );
        rows.push_back( std::move( row ) );
    }
    return rows;
}

inline std::vector< BenchmarkRecord > parse_benchmark_csv( std::string_view text )
{
    const auto rows = parse_csv_rows( text );
    if ( rows.empty() || rows[ 0 ] != csv_columns() )
        throw std::invalid_argument( "unexpected CSV header" );
    auto num = []( const std::string& s, auto& out ) {
        auto [ p, ec ] = std::from_chars( s.data(), s.data() + s.size(), out );
        if ( ec != std::errc{} || p != s.data() + s.size() )
            throw std::invalid_argument( "bad number '" + s + "'" );
    };
    std::vector< BenchmarkRecord > out;
    for ( std::size_t i = 1; i < rows.size(); ++i )
    {
        const auto& f = rows[ i ];
        if ( f.size() != csv_columns().size() )
            throw std::invalid_argument( "CSV row " + std::to_string( i ) + " has wrong arity" );
        BenchmarkRecord r;
        const auto method = parse_method( f[ 0 ] );
        const auto algo = parse_algorithm( f[ 3 ] );
        if ( !method || !algo )
            throw std::invalid_argument( "bad method or algorithm in row " + std::to_string( i ) );
        r.config.method = *method;
        r.config.algorithm = *algo;
        num( f[ 1 ], r.config.T );
        num( f[ 2 ], r.config.n_threads );
        num( f[ 4 ], r.product_states );
        num( f[ 5 ], r.system_states );
        num( f[ 6 ], r.transitions );
        num( f[ 7 ], r.wall_time );
        num( f[ 8 ], r.peak_memory_mb );
        if ( f[ 9 ] == "true" || f[ 9 ] == "false" )
            r.verdict = f[ 9 ] == "true";
        else if ( f[ 9 ] != "limit" )
            throw std::invalid_argument( "bad verdict '" + f[ 9 ] + "'" );
        out.push_back( std::move( r ) );
    }
    return out;
}

// LEDM and SEDM side by side, one row per (T, threads, algorithm).
inline std::string emit_markdown( std::vector< BenchmarkRecord > records )
{
    std::stable_sort( records.begin(), records.end(), record_order );
    using Key = std::tuple< std::int64_t, std::size_t, int >;
    std::map< Key, std::pair< const BenchmarkRecord*, const BenchmarkRecord* > > rows;
    for ( const auto& r : records )
    {
        auto& slot = rows[ { r.config.T, r.config.n_threads, static_cast< int >( r.config.algorithm ) } ];
        ( r.config.method == Method::LEDM ? slot.first : slot.second ) = &r;
    }
    auto cells = []( const BenchmarkRecord* r ) -> std::string {
        if ( !r )
            return " - | - | - | - | - |";
        return " " + std::to_string( r->product_states ) + " | " + std::to_string( r->system_states ) + " | "
               + detail::fixed( r->wall_time, 3 ) + " | "
               + ( r->peak_memory_mb < 0 ? std::string( "n/a" ) : detail::fixed( r->peak_memory_mb, 1 ) ) + " | "
               + detail::verdict_text( *r ) + " |";
    };
    std::string out = "| T | threads | algorithm | LEDM product | LEDM system | LEDM time (s) | LEDM mem (MB) | LEDM holds "
                      "| SEDM product | SEDM system | SEDM time (s) | SEDM mem (MB) | SEDM holds |\n";
    out += "|---|---|---|---|---|---|---|---|---|---|---|---|---|\n";
    for ( const auto& [ key, pair ] : rows )
    {
        const auto& [ T, threads, algo ] = key;
        out += "| " + std::to_string( T ) + " | " + std::to_string( threads ) + " | "
               + algorithm_name( static_cast< Algorithm >( algo ) ) + " |" + cells( pair.first ) + cells( pair.second )
               + "\n";
    }
    return out;
}

} // namespace tickcheck
