package web

import (
	"fmt"
	"net/http"
)

type Server struct {
	root string
}

func (s *Server) Serve(w http.ResponseWriter, r *http.Request) {
	name := r.URL.Query().Get("name")
	fmt.Fprintf(w, "<p>Hello %s</p>", name)
}

func NewServer(root string) *Server {
	return &Server{root: root}
}
