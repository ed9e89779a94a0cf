//! HTTP gateway behavior against a local stub server.

use std::io::{Read, Write};
use std::net::TcpListener;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::Duration;

use nckg::gateway::{ChatRequest, Gateway};
use nckg::templates::TemplateId;

/// Serves the given status codes in order, one per connection, with a
/// chat-completion body on 2xx. Returns the endpoint and a request counter.
fn serve(statuses: Vec<u16>) -> (String, Arc<AtomicUsize>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let endpoint = format!("http://{}/v1/chat/completions", listener.local_addr().unwrap());
    let hits = Arc::new(AtomicUsize::new(0));
    let counter = hits.clone();
    std::thread::spawn(move || {
        for status in statuses {
            let (mut stream, _) = listener.accept().unwrap();
            counter.fetch_add(1, Ordering::SeqCst);
            // drain headers, then the content-length body
            let mut buf = Vec::new();
            let mut byte = [0u8; 1];
            while !buf.ends_with(b"\r\n\r\n") {
                if stream.read(&mut byte).unwrap() == 0 {
                    break;
                }
                buf.push(byte[0]);
            }
            let head = String::from_utf8_lossy(&buf).to_lowercase();
            let length: usize = head
                .lines()
                .find_map(|l| l.strip_prefix("content-length:"))
                .map(|v| v.trim().parse().unwrap())
                .unwrap_or(0);
            let mut body = vec![0u8; length];
            stream.read_exact(&mut body).unwrap();

            let payload = if (200..300).contains(&status) {
                r#"{"choices":[{"message":{"content":"Payment-No risk"},"finish_reason":"stop"}],"usage":{"prompt_tokens":10,"completion_tokens":5}}"#
            } else {
                r#"{"error":"simulated failure"}"#
            };
            let response = format!(
                "HTTP/1.1 {status} X\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{payload}",
                payload.len()
            );
            stream.write_all(response.as_bytes()).unwrap();
        }
    });
    (endpoint, hits)
}

fn request() -> ChatRequest {
    ChatRequest::prompt("gpt-4o", "review this clause", TemplateId::Review)
}

#[test]
fn server_errors_are_retried_until_success() {
    let (endpoint, hits) = serve(vec![500, 500, 200]);
    let gateway = Gateway::http(endpoint, "test-key", Duration::from_secs(5), 3)
        .with_backoff_base(Duration::from_millis(1));
    let response = gateway.complete(&request()).unwrap();
    assert_eq!(response.content, "Payment-No risk");
    assert_eq!(response.usage.prompt_tokens, 10);
    assert_eq!(hits.load(Ordering::SeqCst), 3);
}

#[test]
fn client_errors_are_not_retried() {
    let (endpoint, hits) = serve(vec![400]);
    let gateway = Gateway::http(endpoint, "test-key", Duration::from_secs(5), 3)
        .with_backoff_base(Duration::from_millis(1));
    let err = gateway.complete(&request()).unwrap_err();
    match err {
        nckg::gateway::GatewayError::HttpStatus { status, .. } => assert_eq!(status, 400),
        other => panic!("unexpected: {other}"),
    }
    assert_eq!(hits.load(Ordering::SeqCst), 1);
}

#[test]
fn retries_give_up_after_the_limit() {
    let (endpoint, hits) = serve(vec![500, 500, 500]);
    let gateway = Gateway::http(endpoint, "test-key", Duration::from_secs(5), 2)
        .with_backoff_base(Duration::from_millis(1));
    let err = gateway.complete(&request()).unwrap_err();
    match err {
        nckg::gateway::GatewayError::HttpStatus { status, .. } => assert_eq!(status, 500),
        other => panic!("unexpected: {other}"),
    }
    assert_eq!(hits.load(Ordering::SeqCst), 3);
}
