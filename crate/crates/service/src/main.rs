use std::io;
use std::net::SocketAddr;
use std::process::ExitCode;
use std::sync::Arc;

use advisor_service::api::{cors, router, AppState};
use advisor_service::cli::{self, Cli, Command, ServeArgs};
use clap::Parser;

async fn serve(cli: &Cli, args: &ServeArgs) -> Result<(), String> {
    let state = Arc::new(AppState::from_registry(&cli.registry, &mut io::stderr())?);
    let app = router(state).layer(cors(args.cors_origin.as_deref()));
    let addr: SocketAddr =
        format!("{}:{}", args.host, args.port).parse().map_err(|e| format!("invalid listen address: {e}"))?;
    let listener = tokio::net::TcpListener::bind(addr).await.map_err(|e| format!("bind {addr}: {e}"))?;
    eprintln!("listening on http://{addr}");
    axum::serve(listener, app).await.map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Command::Serve(args) = &cli.command {
        let runtime = tokio::runtime::Runtime::new().expect("tokio runtime");
        return match runtime.block_on(serve(&cli, args)) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(cli::EXIT_CONFIG)
            }
        };
    }
    ExitCode::from(cli::execute(&cli, &mut io::stdout().lock(), &mut io::stderr().lock()))
}
