#pragma once

// Command-line front end: parse, check, reach, gen and bench subcommands.
//
// Exit codes: 0 success / property holds, 1 property violated, 2 usage, parse or
// validation error, 3 state limit exceeded. Results go to `out`; diagnostics and
// timing go to `err` so `out` is byte-stable across runs.

#include "tickcheck/dve.hpp"
#include "tickcheck/errors.hpp"
#include "tickcheck/explorer.hpp"
#include "tickcheck/fischer.hpp"
#include "tickcheck/ltl.hpp"
#include "tickcheck/ltl_check.hpp"
#include "tickcheck/skeleton.hpp"
#include "tickcheck/time_gen.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace tickcheck
{

namespace exit_code
{
inline constexpr int ok = 0;
inline constexpr int violated = 1;
inline constexpr int usage = 2;
inline constexpr int limit = 3;
} // namespace exit_code

namespace detail
{

struct UsageError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

inline std::string read_file( const std::string& path )
{
    std::ifstream in( path, std::ios::binary );
    if ( !in )
        throw UsageError( "cannot read '" + path + "'" );
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file( const std::string& path, const std::string& text )
{
    std::ofstream out( path, std::ios::binary );
    if ( !out || !( out << text ) )
        throw UsageError( "cannot write '" + path + "'" );
}

inline std::optional< std::size_t > env_limit()
{
    const char* raw = std::getenv( "TICKCHECK_MAX_STATES" );
    if ( !raw || !*raw )
        return std::nullopt;
    std::size_t v = 0;
    const std::string_view s( raw );
    auto [ p, ec ] = std::from_chars( s.data(), s.data() + s.size(), v );
    if ( ec != std::errc{} || p != s.data() + s.size() || v == 0 )
        throw UsageError( "TICKCHECK_MAX_STATES must be a positive integer" );
    return v;
}

} // namespace detail

inline int run_cli( const std::vector< std::string >& args, std::ostream& out, std::ostream& err )
{
    CLI::App app{ "Explicit-state LTL model checker for discrete-time models", "tickcheck" };
    app.require_subcommand( 1 );

    std::string path, ltl_text, algo_text = "ndfs", method_text = "sedm", out_path;
    std::optional< std::size_t > max_states;
    bool no_stutter = false;
    std::vector< std::size_t > threads_list{ 2 };
    std::vector< std::int64_t > T_list{ 1, 2 };
    std::vector< std::string > methods{ "ledm", "sedm" };
    std::int64_t margin = FischerConfig{}.margin;

    auto* parse_cmd = app.add_subcommand( "parse", "Parse and validate a model; print it canonically" );
    parse_cmd->add_option( "model", path, "Model file" )->required();

    auto* check_cmd = app.add_subcommand( "check", "Check an LTL property" );
    check_cmd->add_option( "model", path, "Model file" )->required();
    check_cmd->add_option( "--ltl", ltl_text, "LTL formula over global variables" )->required();
    check_cmd->add_option( "--algo", algo_text, "ndfs or owcty" )->check( CLI::IsMember( { "ndfs", "owcty" } ) );
    check_cmd->add_option( "--max-states", max_states, "Product state limit" );
    check_cmd->add_flag( "--no-stutter", no_stutter, "Do not extend deadlocked runs" );

    auto* reach_cmd = app.add_subcommand( "reach", "Count reachable states" );
    reach_cmd->add_option( "model", path, "Model file" )->required();
    reach_cmd->add_option( "--max-states", max_states, "State limit" );

    auto* gen_cmd = app.add_subcommand( "gen", "Compile a timed skeleton into a model" );
    gen_cmd->add_option( "skeleton", path, "Skeleton file" )->required();
    gen_cmd->add_option( "--method", method_text, "ledm or sedm" )->check( CLI::IsMember( { "ledm", "sedm" } ) );
    gen_cmd->add_option( "-o", out_path, "Output model file (default: standard output)" );

    auto* bench_cmd = app.add_subcommand( "bench", "Run the Fischer grid" );
    bench_cmd->add_option( "--threads", threads_list, "Thread counts, comma separated" )->delimiter( ',' );
    bench_cmd->add_option( "--T", T_list, "Timing constants, comma separated" )->delimiter( ',' );
    bench_cmd->add_option( "--method", methods, "Encodings, comma separated" )
        ->delimiter( ',' )
        ->check( CLI::IsMember( { "ledm", "sedm" } ) );
    bench_cmd->add_option( "--algo", algo_text, "ndfs or owcty" )->check( CLI::IsMember( { "ndfs", "owcty" } ) );
    bench_cmd->add_option( "--max-states", max_states, "State limit per entry" );
    bench_cmd->add_option( "--margin", margin, "Extra ticks on step c's window" );
    bench_cmd->add_option( "-o", out_path, "CSV output file" );

    try
    {
        app.parse( std::vector< std::string >( args.rbegin(), args.rend() ) );
    }
    catch ( const CLI::CallForHelp& e )
    {
        return app.exit( e, out, err );
    }
    catch ( const CLI::CallForAllHelp& e )
    {
        return app.exit( e, out, err );
    }
    catch ( const CLI::ParseError& e )
    {
        app.exit( e, out, err );
        return exit_code::usage;
    }

    try
    {
        if ( !max_states )
            max_states = detail::env_limit();

        if ( *parse_cmd )
        {
            const Model m = parse_model( detail::read_file( path ) );
            const CompiledModel checked( m );
            out << render_model( m );
            return exit_code::ok;
        }

        if ( *check_cmd )
        {
            const CompiledModel m( parse_model( detail::read_file( path ) ) );
            const Formula f = parse_ltl( ltl_text );
            CheckOptions opts;
            opts.max_states = max_states;
            opts.stutter = !no_stutter;
            const auto start = std::chrono::steady_clock::now();
            const auto result = verify( m, f, *parse_algorithm( algo_text ), opts );
            const double secs = std::chrono::duration< double >( std::chrono::steady_clock::now() - start ).count();
            out << ( result.verdict.holds ? "holds" : "violated" ) << "\n";
            out << "product states: " << result.stats.states << "\n";
            out << "product transitions: " << result.stats.transitions << "\n";
            if ( result.verdict.counterexample )
                out << "counterexample:\n" << render_lasso( m, *result.verdict.counterexample );
            err << "time: " << detail::fixed( secs, 3 ) << " s\n";
            return result.verdict.holds ? exit_code::ok : exit_code::violated;
        }

        if ( *reach_cmd )
        {
            const CompiledModel m( parse_model( detail::read_file( path ) ) );
            ExploreOptions opts;
            opts.max_states = max_states;
            const auto start = std::chrono::steady_clock::now();
            const auto r = explore_reachable( m, opts );
            const double secs = std::chrono::duration< double >( std::chrono::steady_clock::now() - start ).count();
            out << "states: " << r.state_count << "\n";
            out << "transitions: " << r.transition_count << "\n";
            out << "deadlocks: " << r.deadlock_states << "\n";
            out << "max depth: " << r.max_depth << "\n";
            err << "time: " << detail::fixed( secs, 3 ) << " s\n";
            return exit_code::ok;
        }

        if ( *gen_cmd )
        {
            const Model m = generate( parse_skeleton( detail::read_file( path ) ), *parse_method( method_text ) );
            const CompiledModel checked( m );
            const std::string text = render_model( m );
            if ( out_path.empty() )
                out << text;
            else
                detail::write_file( out_path, text );
            return exit_code::ok;
        }

        // bench
        std::vector< FischerConfig > grid;
        for ( auto n : threads_list )
            for ( auto T : T_list )
                for ( const auto& meth : methods )
                {
                    FischerConfig c;
                    c.n_threads = n;
                    c.T = T;
                    c.method = *parse_method( meth );
                    c.algorithm = *parse_algorithm( algo_text );
                    c.margin = margin;
                    validate_fischer( c );
                    grid.push_back( c );
                }
        BenchOptions opts;
        opts.max_states = max_states;
        const auto records = run_benchmark( grid, opts );
        out << emit_markdown( records );
        const std::string csv = emit_csv( records );
        if ( out_path.empty() )
            out << "\n" << csv;
        else
            detail::write_file( out_path, csv );
        bool limited = false;
        for ( const auto& r : records )
        {
            limited = limited || !r.verdict;
            if ( !r.error.empty() )
                err << "T=" << r.config.T << " threads=" << r.config.n_threads << " " << method_name( r.config.method )
                    << ": " << r.error << "\n";
        }
        if ( limited )
            return exit_code::limit;
        for ( const auto& r : records )
            if ( !*r.verdict )
                return exit_code::violated;
        return exit_code::ok;
    }
    catch ( const LimitExceeded& e )
    {
        err << "limit exceeded: " << e.what() << "\n";
        return exit_code::limit;
    }
    catch ( const ParseError& e )
    {
        err << "parse error: " << e.what() << "\n";
        return exit_code::usage;
    }
    catch ( const ValidationError& e )
    {
        err << "invalid input: " << e.what() << "\n";
        return exit_code::usage;
    }
    catch ( const EvaluationError& e )
    {
        err << "evaluation error: " << e.what() << "\n";
        return exit_code::usage;
    }
    catch ( const detail::UsageError& e )
    {
        err << "error: " << e.what() << "\n";
        return exit_code::usage;
    }
}

} // namespace tickcheck
